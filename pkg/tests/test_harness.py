import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ekcg import gen_poisson2d, write_partition, contiguous_partition
from ekcg.cli import main as cli_main
from ekcg.harness import (
    CSV_COLUMNS,
    parse_matrix_spec,
    parse_precond_spec,
    parse_retention_spec,
    run_experiment,
)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestParsers:
    def test_matrix_specs(self):
        name, A = parse_matrix_spec("poisson2d:4,5")
        assert name == "poisson2d_4x5" and A.n == 20
        name, A = parse_matrix_spec("poisson3d:3,3,3")
        assert A.n == 27
        name, A = parse_matrix_spec("aniso3d:4,4,4,100")
        assert A.n == 64 and "c100" in name
        name, A = parse_matrix_spec("skyscraper:6,6,1000")
        assert A.n == 36
        name, A = parse_matrix_spec("skyscraper:4,4,4,1000")
        assert A.n == 64

    def test_matrix_spec_mm(self, tmp_path):
        from ekcg import write_matrix_market
        A = gen_poisson2d(3, 3)
        path = tmp_path / "small.mtx"
        write_matrix_market(A, path)
        name, B = parse_matrix_spec(f"mm:{path}")
        assert name == "small" and B.n == 9

    def test_unknown_matrix(self):
        with pytest.raises(ValueError, match="unknown matrix"):
            parse_matrix_spec("hilbert:5")

    def test_retention_specs(self):
        assert parse_retention_spec("full") == {"retention": "full"}
        assert parse_retention_spec("trunc:3") == {"retention": "trunc", "trunc": 3}
        assert parse_retention_spec("restart:20") == {"retention": "restart", "restart_j": 20}
        got = parse_retention_spec("restart-tol:1e-5")
        assert got == {"retention": "restart-tol", "restart_tol": 1e-5}
        with pytest.raises(ValueError):
            parse_retention_spec("window:3")

    def test_precond_specs(self):
        assert parse_precond_spec("none") is None
        assert parse_precond_spec("bj-chol:8") == ("chol", 8)
        assert parse_precond_spec("bj-ichol0:4") == ("ichol0", 4)
        with pytest.raises(ValueError):
            parse_precond_spec("ilu:2")


BASE_SPEC = {
    "matrix": "poisson2d:10,10",
    "methods": ["cg", "sre-cg2", "msdo-cg"],
    "t": [2, 4],
    "retention": ["full"],
    "tol": 1e-8,
    "seed": 7,
}


class TestRunExperiment:
    def test_cardinality_and_cg_row(self, tmp_path):
        rows = run_experiment(dict(BASE_SPEC), tmp_path, render_figures=False)
        # 1 CG row + 2 methods x 2 t x 1 retention
        assert len(rows) == 1 + 2 * 2
        on_disk = read_rows(tmp_path / "runs.csv")
        assert [r["method"] for r in on_disk[:1]] == ["cg"]
        assert on_disk[0]["t"] == ""  # CG row has empty t
        assert all(r["status"] == "converged" for r in on_disk)
        assert (tmp_path / "spec.json").exists()

    def test_history_files_written(self, tmp_path):
        rows = run_experiment(dict(BASE_SPEC), tmp_path, render_figures=False)
        for row in rows:
            hist = tmp_path / f"{row['run_id']}_history.tsv"
            assert hist.exists()
            lines = hist.read_text().splitlines()
            assert lines[0] == "iteration\trho\ttol1"
            assert len(lines) == 2 + int(row["iterations"])

    def test_determinism_bit_identical_modulo_wall_time(self, tmp_path):
        run_experiment(dict(BASE_SPEC), tmp_path / "a", render_figures=False)
        run_experiment(dict(BASE_SPEC), tmp_path / "b", render_figures=False)
        strip = CSV_COLUMNS.index("wall_time_s")
        for name in ("a", "b"):
            assert (tmp_path / name / "runs.csv").exists()
        rows_a = [r.split(",") for r in (tmp_path / "a" / "runs.csv").read_text().splitlines()]
        rows_b = [r.split(",") for r in (tmp_path / "b" / "runs.csv").read_text().splitlines()]
        for ra, rb in zip(rows_a, rows_b):
            del ra[strip], rb[strip]
            assert ra == rb
        # residual histories are bit-identical outright
        for hist in sorted((tmp_path / "a").glob("*_history.tsv")):
            twin = tmp_path / "b" / hist.name
            assert hist.read_text() == twin.read_text()

    def test_mem_identity_for_full_retention_rows(self, tmp_path):
        rows = run_experiment(dict(BASE_SPEC), tmp_path, render_figures=False)
        for row in rows:
            if row["method"] == "sre-cg2" and row["retention"] == "full":
                assert row["peak_block_vectors"] == row["t"] * row["iterations"]

    def test_figures_rendered(self, tmp_path):
        spec = dict(BASE_SPEC, methods=["cg", "sre-cg2"], t=[2])
        rows = run_experiment(spec, tmp_path, render_figures=True)
        for row in rows:
            png = tmp_path / f"{row['run_id']}_residual.png"
            assert png.exists() and png.stat().st_size > 0
        summary = tmp_path / "convergence_summary.png"
        assert summary.exists() and summary.stat().st_size > 0

    def test_partition_file_source(self, tmp_path):
        part_file = tmp_path / "p.txt"
        write_partition(contiguous_partition(100, 2), part_file)
        spec = dict(BASE_SPEC, methods=["sre-cg2"], t=[2],
                    partition=f"file:{part_file}")
        rows = run_experiment(spec, tmp_path / "out", render_figures=False)
        assert rows[0]["status"] == "converged"

    def test_failed_cell_recorded_not_raised(self, tmp_path):
        spec = dict(BASE_SPEC, methods=["sre-cg2"], t=[3], switch_tol=1e-5)
        rows = run_experiment(spec, tmp_path, render_figures=False)  # odd t + switch
        assert len(rows) == 1
        assert rows[0]["status"].startswith("error:")

    def test_preconditioned_batch(self, tmp_path):
        spec = dict(BASE_SPEC, methods=["cg", "sre-cg2"], t=[4],
                    precond="bj-chol:4", precond_mode="modified")
        rows = run_experiment(spec, tmp_path, render_figures=False)
        assert all(r["status"] == "converged" for r in rows)
        assert all(r["precond"] == "bj-chol" for r in rows)

    def test_explicit_hat_batch(self, tmp_path):
        spec = dict(BASE_SPEC, methods=["msdo-cg"], t=[4],
                    precond="bj-ichol0:4", precond_mode="explicit-hat")
        rows = run_experiment(spec, tmp_path, render_figures=False)
        assert rows[0]["status"] == "converged"
        assert rows[0]["precond"] == "bj-ichol0"

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown experiment spec"):
            run_experiment({"matrix": "poisson2d:4,4", "budget": 3}, tmp_path)


class TestCli:
    def test_run_subcommand(self, tmp_path, capsys):
        rc = cli_main([
            "run", "--matrix", "poisson2d:8,8", "--method", "sre-cg2",
            "--t", "2", "--seed", "5", "--out", str(tmp_path), "--no-figures",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "status=converged" in out
        assert (tmp_path / "runs.csv").exists()

    def test_run_with_switch_and_preconditioner(self, tmp_path, capsys):
        rc = cli_main([
            "run", "--matrix", "aniso3d:6,6,6,1e3", "--method", "msdo-cg",
            "--t", "4", "--switch-tol", "1e-5", "--precond", "bj-chol:4",
            "--precond-mode", "modified", "--seed", "5", "--out", str(tmp_path),
        ])
        assert rc == 0
        row = read_rows(tmp_path / "runs.csv")[0]
        assert row["status"] == "converged"
        assert row["precond"] == "bj-chol" and row["precond_blocks"] == "4"
        assert (tmp_path / f"{row['run_id']}_residual.png").exists()

    def test_run_renders_figures_by_default(self, tmp_path):
        cli_main(["run", "--matrix", "poisson2d:6,6", "--method", "cg",
                  "--out", str(tmp_path)])
        assert list(tmp_path.glob("*_residual.png"))

    def test_batch_subcommand(self, tmp_path, capsys):
        spec_path = tmp_path / "exp.json"
        spec_path.write_text(json.dumps(dict(BASE_SPEC, methods=["cg"], t=[1])))
        rc = cli_main(["batch", "--spec", str(spec_path),
                       "--out", str(tmp_path / "out"), "--no-figures"])
        assert rc == 0
        assert "runs.csv" in capsys.readouterr().out
        assert (tmp_path / "out" / "runs.csv").exists()

    def test_matgen_subcommand(self, tmp_path, capsys):
        target = tmp_path / "gen.mtx"
        rc = cli_main(["matgen", "--matrix", "poisson2d:4,4", "--out", str(target)])
        assert rc == 0
        from ekcg import read_matrix_market
        A = read_matrix_market(target)
        assert A.n == 16
