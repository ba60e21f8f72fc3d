"""Command-line interface: single runs, batch experiments, matrix generation."""

import argparse
import json
import sys

from .harness import run_experiment
from .mmio import write_matrix_market
from .solvers import METHODS

SUMMARY_COLUMNS = ["run_id", "method", "t", "retention", "status", "iterations",
                   "switch_iteration", "restart_count", "peak_block_vectors",
                   "relative_error"]


def _add_run_arguments(p):
    p.add_argument("--matrix", required=True,
                   help="poisson2d:NX,NY | poisson3d:NX,NY,NZ | aniso3d:NX,NY,NZ,C"
                        " | skyscraper:NX,NY[,NZ],C | mm:PATH")
    p.add_argument("--partition", default="contiguous",
                   help="contiguous | file:PATH (default: contiguous)")
    p.add_argument("--method", default="cg", choices=METHODS)
    p.add_argument("--t", type=int, default=1, help="enlargement factor (subdomain count)")
    p.add_argument("--retention", default="full",
                   help="full | trunc:K | restart:J | restart-tol:TOL")
    p.add_argument("--switch-tol", type=float, default=None,
                   help="flexible half-width switch tolerance")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="relative residual stopping tolerance (default 1e-8)")
    p.add_argument("--kmax", type=int, default=None,
                   help="iteration cap (default: 2n)")
    p.add_argument("--precond", default="none",
                   help="none | bj-chol:NBLOCKS | bj-ichol0:NBLOCKS")
    p.add_argument("--precond-mode", default="modified",
                   choices=["modified", "explicit-hat"])
    p.add_argument("--seed", type=int, default=0, help="right-hand-side seed")
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--no-figures", action="store_true",
                   help="emit CSV/TSV only, skip PNG rendering")


def _print_rows(rows):
    for row in rows:
        parts = [f"{col}={row.get(col)}" for col in SUMMARY_COLUMNS
                 if row.get(col) not in (None, "")]
        print("  ".join(parts))


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ekcg",
        description="Enlarged Krylov CG experiment driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one solver configuration")
    _add_run_arguments(p_run)

    p_batch = sub.add_parser("batch", help="run a (method x t x retention) batch")
    p_batch.add_argument("--spec", required=True, help="JSON experiment spec file")
    p_batch.add_argument("--out", default="runs", help="output directory")
    p_batch.add_argument("--no-figures", action="store_true")

    p_gen = sub.add_parser("matgen", help="write a generated matrix as Matrix Market")
    p_gen.add_argument("--matrix", required=True, help="generator spec (see run --matrix)")
    p_gen.add_argument("--out", required=True, help="output .mtx path")

    args = parser.parse_args(argv)

    if args.command == "matgen":
        from .harness import parse_matrix_spec
        name, A = parse_matrix_spec(args.matrix)
        write_matrix_market(A, args.out)
        print(f"wrote {name}: n={A.n}, nnz={A.nnz} -> {args.out}")
        return 0

    if args.command == "batch":
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        rows = run_experiment(spec, args.out, render_figures=not args.no_figures)
        _print_rows(rows)
        print(f"{len(rows)} runs -> {args.out}/runs.csv")
        return 0

    # single run = one-cell batch
    spec = {
        "matrix": args.matrix,
        "partition": args.partition,
        "methods": [args.method],
        "t": [args.t],
        "retention": [args.retention],
        "switch_tol": args.switch_tol,
        "tol": args.tol,
        "kmax": args.kmax,
        "precond": args.precond,
        "precond_mode": args.precond_mode,
        "seed": args.seed,
    }
    rows = run_experiment(spec, args.out, render_figures=not args.no_figures)
    _print_rows(rows)
    print(f"{len(rows)} runs -> {args.out}/runs.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
