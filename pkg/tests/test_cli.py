import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ncx2mode.cli import (
    BENCH_FIELDS,
    EXIT_INAPPLICABLE,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_USAGE,
    MODE_FIELDS,
    PDF_FIELDS,
    SWEEP_FIELDS,
    format_value,
    main,
)
from ncx2mode.density import Params, log_pdf


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def exit_code(argv):
    """Exit code whether main returns it or argparse exits with it."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def rows(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [dict(zip(header, r)) for r in reader]


class TestPdf:
    def test_single_point(self, capsys):
        code, out, _ = run(capsys, "pdf", "--k", "2", "--lambda", "0", "--x", "0")
        assert code == EXIT_OK
        header, rs = rows(out)
        assert tuple(header) == PDF_FIELDS
        assert rs == [{"x": "0.0", "pdf": "0.5", "log_pdf": repr(-math.log(2))}]

    def test_grid(self, capsys):
        code, out, _ = run(capsys, "pdf", "--k", "2", "--lambda", "1", "--x-min", "0", "--x-max", "8", "--points", "5")
        assert code == EXIT_OK
        _, rs = rows(out)
        assert [float(r["x"]) for r in rs] == [0, 2, 4, 6, 8]

    def test_single_interior_maximum(self, capsys):
        _, out, _ = run(capsys, "pdf", "--k", "2", "--lambda", "3", "--x-min", "0", "--x-max", "20", "--points", "201")
        _, rs = rows(out)
        ys = np.array([float(r["pdf"]) for r in rs])
        i = int(np.argmax(ys))
        assert 0 < i < len(ys) - 1
        d = np.sign(np.diff(ys))
        assert np.all(d[:i] > 0) and np.all(d[i:] < 0)

    def test_zero_density_at_origin(self, capsys):
        _, out, _ = run(capsys, "pdf", "--k", "5", "--lambda", "1", "--x", "0")
        assert rows(out)[1] == [{"x": "0.0", "pdf": "0.0", "log_pdf": "-inf"}]

    @pytest.mark.parametrize(
        "argv",
        [
            ["pdf", "--k", "-1", "--lambda", "0", "--x", "1"],
            ["pdf", "--k", "1", "--lambda", "0", "--x", "0"],
            ["pdf", "--k", "2", "--lambda", "0"],
            ["pdf", "--k", "2", "--lambda", "0", "--x-min", "3", "--x-max", "1"],
            ["pdf", "--k", "2", "--lambda", "0", "--x", "-1"],
            ["pdf", "--k", "two", "--lambda", "0", "--x", "1"],
            ["pdf", "--lambda", "0", "--x", "1"],
            ["frobnicate"],
            [],
        ],
    )
    def test_usage_errors(self, capsys, argv):
        assert exit_code(argv) == EXIT_USAGE
        out, err = capsys.readouterr()
        assert out == ""
        assert len(err.strip().splitlines()) == 1


class TestMode:
    def test_approx_outside_region(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "5", "--lambda", "10", "--method", "approx")
        assert code == EXIT_INAPPLICABLE
        header, [r] = rows(out)
        assert tuple(header) == MODE_FIELDS
        assert float(r["location"]) == pytest.approx(12.1, rel=1e-15)
        assert r["applicable"] == "false" and r["method"] == "approx" and r["scale_t"] == "0.5"

    def test_approx_inside_region(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "50", "--lambda", "1000", "--method", "approx")
        assert code == EXIT_OK
        r = rows(out)[1][0]
        assert float(r["location"]) == pytest.approx(1047.0235, rel=1e-15)
        assert r["applicable"] == "true"

    def test_approx_two_dof_inapplicable(self, capsys):
        code, _, _ = run(capsys, "mode", "--k", "2", "--lambda", "100", "--method", "approx")
        assert code == EXIT_INAPPLICABLE

    def test_unbounded(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "1", "--lambda", "5", "--method", "exact")
        assert code == EXIT_OK
        r = rows(out)[1][0]
        assert r["tag"] == "UNBOUNDED_AT_ZERO" and r["location"] == "" and r["residual"] == ""

    def test_at_zero(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "2", "--lambda", "1.5", "--method", "exact")
        assert code == EXIT_OK
        r = rows(out)[1][0]
        assert r["tag"] == "AT_ZERO" and r["location"] == ""

    def test_central(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "4", "--lambda", "0", "--method", "exact")
        assert code == EXIT_OK
        r = rows(out)[1][0]
        assert r["tag"] == "INTERIOR" and float(r["location"]) == 2.0

    def test_exact_certified(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "5", "--lambda", "10", "--method", "exact", "--strategy", "naive")
        r = rows(out)[1][0]
        assert code == EXIT_OK
        assert float(r["location"]) == pytest.approx(12.099999986498974, rel=2e-10)
        assert abs(float(r["residual"])) <= 1e-6

    def test_auto_resolves(self, capsys):
        _, out, _ = run(capsys, "mode", "--k", "10", "--lambda", "100")
        assert rows(out)[1][0]["method"] == "approx"
        _, out, _ = run(capsys, "mode", "--k", "10", "--lambda", "20")
        assert rows(out)[1][0]["method"] == "exact"

    def test_solver_failure(self, capsys):
        code, out, err = run(capsys, "mode", "--k", "10", "--lambda", "1e-12", "--method", "exact", "--strategy", "corrected")
        assert code == EXIT_SOLVER
        assert out == "" and err.startswith("ncx2mode: error:")

    def test_json(self, capsys):
        code, out, _ = run(capsys, "mode", "--k", "1", "--lambda", "5", "--method", "exact", "--format", "json")
        assert code == EXIT_OK
        [obj] = json.loads(out)
        assert list(obj) == list(MODE_FIELDS)
        assert obj["location"] is None and obj["tag"] == "UNBOUNDED_AT_ZERO" and obj["applicable"] is False

    def test_bad_xtol(self, capsys):
        code, _, err = run(capsys, "mode", "--k", "5", "--lambda", "10", "--xtol", "0")
        assert code == EXIT_USAGE and err.count("\n") == 1


class TestSweep:
    def test_three_dof_error_is_tiny(self, capsys):
        code, out, _ = run(capsys, "sweep", "--mode", "lambda", "--k", "3", "--lambda-min", "8", "--lambda-max", "64", "--points", "4")
        assert code == EXIT_OK
        header, rs = rows(out)
        assert tuple(header) == SWEEP_FIELDS
        assert len(rs) == 4
        # solver tolerance plus the 4 lam exp(-2 lam) tail at lam = 8
        assert all(float(r["abs_err"]) <= 1e-5 for r in rs)
        assert all(float(r["abs_err"]) <= 1e-8 for r in rs[1:])

    def test_error_decreasing(self, capsys):
        _, out, _ = run(capsys, "sweep", "--mode", "lambda", "--k", "10", "--lambda-min", "40", "--lambda-max", "640", "--points", "5")
        errs = [float(r["abs_err"]) for r in rows(out)[1]]
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_k_grid(self, capsys):
        _, out, _ = run(capsys, "sweep", "--mode", "k", "--scale", "0.05", "--k-min", "3", "--k-max", "50", "--points", "10")
        rs = rows(out)[1]
        assert len(rs) == 10
        assert all(float(r["scale_t"]) == pytest.approx(0.05) for r in rs)

    def test_at_zero_and_failures(self, capsys):
        code, out, err = run(capsys, "sweep", "--mode", "lambda", "--k", "2", "--lambda-min", "0", "--lambda-max", "1", "--points", "2")
        assert code == EXIT_OK
        rs = rows(out)[1]
        assert rs[0]["mode_exact"] == "0.0" and rs[0]["mode_approx"] == "nan"
        assert rs[1]["mode_exact"] == "0.0"

    def test_missing_flags(self, capsys):
        code, _, _ = run(capsys, "sweep", "--mode", "k", "--k-min", "3", "--k-max", "50")
        assert code == EXIT_USAGE


BENCH_K2 = ["bench", "--mode", "lambda", "--k", "2", "--lambda-min", "4", "--lambda-max", "100", "--points", "25",
            "--strategies", "naive,corrected", "--timing", "false"]


class TestBench:
    def test_dominance(self, capsys):
        code, out, _ = run(capsys, *BENCH_K2)
        assert code == EXIT_OK
        header, rs = rows(out)
        assert tuple(header) == BENCH_FIELDS
        assert len(rs) == 50
        by = {}
        for r in rs:
            by.setdefault(float(r["lambda"]), {})[r["strategy"]] = int(r["doublings"])
        assert all(d["corrected"] <= d["naive"] for lam, d in by.items() if lam > 7)
        assert all(r["wall_ns_mean"] == "" and r["failed"] == "false" for r in rs)

    def test_timing_columns(self, capsys):
        code, out, _ = run(capsys, "bench", "--mode", "lambda", "--k", "15", "--lambda-min", "60", "--lambda-max", "600",
                           "--points", "2", "--reps", "100", "--jitter", "1e-6", "--timing", "true")
        assert code == EXIT_OK
        for r in rows(out)[1]:
            assert float(r["wall_ns_mean"]) > 0 and float(r["wall_ns_std"]) >= 0

    def test_seed_byte_identical(self, capsys):
        argv = BENCH_K2 + ["--seed", "42"]
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second

    def test_file_output(self, capsys, tmp_path):
        path = tmp_path / "bench.csv"
        code, out, _ = run(capsys, *BENCH_K2, "--out", str(path))
        assert code == EXIT_OK and out == ""
        assert path.read_bytes() == run(capsys, *BENCH_K2)[1].encode()
        assert b"\r" not in path.read_bytes()

    def test_failures_are_data(self, capsys):
        code, out, err = run(capsys, "bench", "--mode", "k", "--k-min", "10", "--k-max", "20", "--scale", "100000",
                             "--points", "2", "--strategies", "corrected")
        assert code == EXIT_OK
        assert all(r["failed"] == "true" for r in rows(out)[1])
        assert "search failed" in err

    @pytest.mark.parametrize(
        "extra",
        [["--strategies", "naive,bogus"], ["--timing", "maybe"], ["--reps", "0"], ["--points", "1"]],
    )
    def test_parse_errors(self, capsys, extra):
        assert exit_code(BENCH_K2 + extra) == EXIT_USAGE

    def test_modeless_region_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "bench", "--mode", "lambda", "--k", "2", "--lambda-min", "1", "--lambda-max", "4", "--points", "3")
        assert code == EXIT_USAGE


def test_format_value_round_trips():
    for v in [0.1, 1 / 3, 12.099999986498974, 1e-300, 5e-324, 1.7976931348623157e308, -2.5]:
        token = format_value(v)
        assert float(token) == v
        assert len(token.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_csv_round_trip_pdf(capsys):
    _, out, _ = run(capsys, "pdf", "--k", "7.3", "--lambda", "11.1", "--x-min", "0.1", "--x-max", "40", "--points", "37")
    p = Params(7.3, 11.1)
    for r in rows(out)[1]:
        assert float(r["log_pdf"]) == log_pdf(p, float(r["x"]))
    assert "\r" not in out and '"' not in out


def test_json_nan_is_null(capsys):
    _, out, _ = run(capsys, "sweep", "--mode", "lambda", "--k", "2", "--lambda-min", "0", "--lambda-max", "1",
                    "--points", "2", "--format", "json")
    objs = json.loads(out)
    assert objs[0]["mode_approx"] is None and objs[0]["mode_exact"] == 0.0


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "ncx2mode", "mode", "--k", "4", "--lambda", "0", "--method", "exact"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(MODE_FIELDS)
