"""Experiment driver: batch solver runs with machine-readable reports.

An experiment is described by a spec (a dict, usually loaded from JSON)
mirroring the CLI flags.  Running it produces one CSV row per (method, t,
retention) cell, a residual-history TSV per run, and, unless disabled, a PNG
convergence figure per run plus one summary figure.

The right-hand side follows the fixed protocol: x_star has entries uniform
in [0, 4) drawn from a seeded PCG64 stream, b = A x_star, and x0 = 0.
Reruns with the same spec and seed are bit-identical except for wall time.
"""

import csv
import json
import time
from pathlib import Path

from .generators import gen_aniso3d, gen_poisson2d, gen_poisson3d, gen_skyscraper, make_rhs
from .mmio import read_matrix_market
from .partition import contiguous_partition, read_partition
from .blockjacobi import build_block_jacobi, uniform_block_bounds
from .solvers import METHODS, SolverConfig, cg, enlarged_solve

__all__ = [
    "CSV_COLUMNS",
    "parse_matrix_spec",
    "parse_retention_spec",
    "parse_precond_spec",
    "run_experiment",
]

CSV_COLUMNS = [
    "run_id", "matrix", "method", "t", "partition", "retention", "trunc",
    "restart_j", "restart_tol", "switch_tol", "precond", "precond_blocks",
    "precond_mode", "tol", "kmax", "seed", "status", "iterations",
    "switch_iteration", "restart_count", "peak_block_vectors",
    "relative_error", "true_residual", "wall_time_s",
]

SPEC_KEYS = {
    "matrix", "partition", "methods", "t", "retention", "switch_tol",
    "tol", "kmax", "precond", "precond_mode", "seed",
}


def parse_matrix_spec(spec):
    """Build a matrix from a spec string; returns (name, SparseSpdMatrix).

    Formats: poisson2d:NX,NY | poisson3d:NX,NY,NZ | aniso3d:NX,NY,NZ,CONTRAST
    | skyscraper:NX,NY,CONTRAST | skyscraper:NX,NY,NZ,CONTRAST | mm:PATH
    """
    kind, _, rest = spec.partition(":")
    if kind == "mm":
        if not rest:
            raise ValueError("mm matrix spec needs a path: mm:PATH")
        return Path(rest).stem, read_matrix_market(rest)
    args = [a for a in rest.split(",") if a] if rest else []
    if kind == "poisson2d":
        if len(args) != 2:
            raise ValueError("poisson2d spec needs NX,NY")
        nx, ny = (int(a) for a in args)
        return f"poisson2d_{nx}x{ny}", gen_poisson2d(nx, ny)
    if kind == "poisson3d":
        if len(args) != 3:
            raise ValueError("poisson3d spec needs NX,NY,NZ")
        nx, ny, nz = (int(a) for a in args)
        return f"poisson3d_{nx}x{ny}x{nz}", gen_poisson3d(nx, ny, nz)
    if kind == "aniso3d":
        if len(args) != 4:
            raise ValueError("aniso3d spec needs NX,NY,NZ,CONTRAST")
        nx, ny, nz = (int(a) for a in args[:3])
        contrast = float(args[3])
        return f"aniso3d_{nx}x{ny}x{nz}_c{contrast:g}", gen_aniso3d(nx, ny, nz, contrast)
    if kind == "skyscraper":
        if len(args) == 3:
            nx, ny = int(args[0]), int(args[1])
            contrast = float(args[2])
            return f"skyscraper_{nx}x{ny}_c{contrast:g}", gen_skyscraper(nx, ny, contrast=contrast)
        if len(args) == 4:
            nx, ny, nz = (int(a) for a in args[:3])
            contrast = float(args[3])
            return (f"skyscraper_{nx}x{ny}x{nz}_c{contrast:g}",
                    gen_skyscraper(nx, ny, nz, contrast=contrast))
        raise ValueError("skyscraper spec needs NX,NY,CONTRAST or NX,NY,NZ,CONTRAST")
    raise ValueError(f"unknown matrix spec {spec!r}")


def parse_retention_spec(spec):
    """Parse full | trunc:K | restart:J | restart-tol:TOL into config fields."""
    kind, _, arg = spec.partition(":")
    if kind == "full":
        return {"retention": "full"}
    if kind == "trunc":
        return {"retention": "trunc", "trunc": int(arg)}
    if kind == "restart":
        return {"retention": "restart", "restart_j": int(arg)}
    if kind == "restart-tol":
        return {"retention": "restart-tol", "restart_tol": float(arg)}
    raise ValueError(f"unknown retention spec {spec!r}")


def parse_precond_spec(spec):
    """Parse none | bj-chol:NBLOCKS | bj-ichol0:NBLOCKS."""
    if spec in (None, "", "none"):
        return None
    kind, _, arg = spec.partition(":")
    if kind == "bj-chol":
        return ("chol", int(arg))
    if kind == "bj-ichol0":
        return ("ichol0", int(arg))
    raise ValueError(f"unknown preconditioner spec {spec!r}")


def _as_list(value):
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _build_partition(partition_spec, n, t):
    kind, _, rest = str(partition_spec).partition(":")
    if kind == "contiguous":
        return contiguous_partition(n, t)
    if kind == "file":
        part = read_partition(rest)
        if part.n != n:
            raise ValueError(f"partition file is for n={part.n}, matrix has n={n}")
        if part.t != t:
            raise ValueError(f"partition file has t={part.t}, requested t={t}")
        return part
    raise ValueError(f"unknown partition spec {partition_spec!r}")


def run_experiment(spec, out_dir, render_figures=True):
    """Run the (method x t x retention) batch described by `spec`.

    Writes runs.csv, one <run_id>_history.tsv per run, per-run PNG figures
    and a summary figure (unless render_figures is false), and spec.json.
    Individual run failures become rows with their status; they never abort
    the batch.  Returns the list of row dicts.
    """
    unknown = set(spec) - SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
    if "matrix" not in spec:
        raise ValueError("experiment spec needs a 'matrix' entry")
    methods = _as_list(spec.get("methods", ["cg"]))
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    t_values = [int(t) for t in _as_list(spec.get("t", [1]))]
    retentions = _as_list(spec.get("retention", ["full"])) or ["full"]
    switch_tol = spec.get("switch_tol")
    tol = float(spec.get("tol", 1e-8))
    kmax = spec.get("kmax")
    kmax = int(kmax) if kmax is not None else None
    seed = int(spec.get("seed", 0))
    partition_spec = spec.get("partition", "contiguous")
    precond_spec = spec.get("precond", "none")
    precond_mode = spec.get("precond_mode", "modified")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    matrix_name, A = parse_matrix_spec(spec["matrix"])
    b, x_star = make_rhs(A, seed)

    factor = None
    precond_label, precond_blocks = "none", None
    parsed = parse_precond_spec(precond_spec)
    if parsed is not None:
        kind, nblocks = parsed
        factor = build_block_jacobi(A, uniform_block_bounds(A.n, nblocks), kind=kind)
        precond_label, precond_blocks = f"bj-{kind}", nblocks

    base = {
        "matrix": matrix_name,
        "partition": str(partition_spec),
        "tol": tol,
        "kmax": kmax,
        "seed": seed,
        "precond": precond_label,
        "precond_blocks": precond_blocks,
        "precond_mode": precond_mode if factor is not None else "",
    }

    cells = []
    if "cg" in methods:
        cells.append(("cg", None, None))
    for method in methods:
        if method == "cg":
            continue
        for t in t_values:
            for retention in retentions:
                cells.append((method, t, retention))

    rows = []
    histories = []
    for index, (method, t, retention) in enumerate(cells):
        run_id = f"run{index:03d}_{method}"
        if t is not None:
            run_id += f"_t{t}"
        if retention not in (None, "full"):
            run_id += "_" + retention.replace(":", "")
        row = dict.fromkeys(CSV_COLUMNS)
        row.update(base)
        row.update(run_id=run_id, method=method, t=t, retention=retention)

        started = time.perf_counter()
        try:
            if method == "cg":
                cfg = SolverConfig(method="cg", tol=tol, kmax=kmax, preconditioner=factor)
                _, report = cg(A, b, cfg=cfg, x_star=x_star)
                row["retention"] = None
                row["partition"] = None
            else:
                ret_fields = parse_retention_spec(retention)
                row.update(ret_fields)
                row["retention"] = ret_fields["retention"]
                part = _build_partition(partition_spec, A.n, t)
                cfg = SolverConfig(method=method, t=t, tol=tol, kmax=kmax,
                                   switch_tol=switch_tol, preconditioner=factor,
                                   precond_mode=precond_mode, **ret_fields)
                row["switch_tol"] = switch_tol
                _, report = enlarged_solve(A, b, partition=part, cfg=cfg, x_star=x_star)
        except Exception as exc:  # noqa: BLE001 - the row records the failure
            row["status"] = f"error: {type(exc).__name__}"
            row["wall_time_s"] = f"{time.perf_counter() - started:.6f}"
            rows.append(row)
            continue

        elapsed = time.perf_counter() - started
        row.update(
            status=report.status,
            iterations=report.iterations,
            switch_iteration=report.switch_iteration,
            restart_count=len(report.restart_iterations),
            peak_block_vectors=report.peak_block_vectors,
            relative_error=report.relative_error,
            true_residual=report.true_residual,
            wall_time_s=f"{elapsed:.6f}",
        )
        rows.append(row)
        history_path = out / f"{run_id}_history.tsv"
        _write_history(history_path, report.residual_history)
        histories.append((run_id, report))
        if render_figures:
            from .figures import render_run_figure
            render_run_figure(report, title=f"{matrix_name} {run_id}",
                              path=out / f"{run_id}_residual.png")

    _write_csv(out / "runs.csv", rows)
    with open(out / "spec.json", "w", encoding="utf-8") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if render_figures and histories:
        from .figures import render_summary_figure
        render_summary_figure(histories, title=matrix_name,
                              path=out / "convergence_summary.png")
    return rows


def _write_history(path, history):
    history = [float(rho) for rho in history]
    rho0 = history[0] if history[0] > 0.0 else 1.0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("iteration\trho\ttol1\n")
        fh.write(f"0\t{history[0]!r}\t1\n")
        for k in range(1, len(history)):
            tol1 = abs(history[k] - history[k - 1]) / rho0
            fh.write(f"{k}\t{history[k]!r}\t{tol1!r}\n")


def _write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
