"""Command-line front end: artifacts, determinism, exit codes."""

import math

import numpy as np
import pytest

from stretchrenew import cli
from stretchrenew.kilbas_saigo import KSParams, ToleranceError, ks_eval
from stretchrenew.cli import main, read_table


def run(tmp_path, name, argv):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, out


class TestKsEval:
    def test_values_roundtrip(self, tmp_path):
        code, out = run(tmp_path, "ks.csv", [
            "ks-eval", "--alpha", "0.7", "--gamma", "0.1",
            "--z-min", "-2.0", "--z-max", "2.0", "--z-count", "5",
        ])
        assert code == 0
        meta, cols, rows = read_table(out)
        assert cols == ["z", "ks_value"]
        assert meta["tool"] == "stretchrenew"
        params = KSParams.stretched(0.7, 0.1)
        for z, v in rows:
            assert v == pytest.approx(float(ks_eval(params, z)), rel=1e-15)

    def test_json_mirror(self, tmp_path):
        args = ["ks-eval", "--alpha", "0.7", "--gamma", "0.1",
                "--z-min", "-1.0", "--z-max", "1.0", "--z-count", "3"]
        c1, csv_out = run(tmp_path, "ks.csv", args + ["--format", "csv"])
        c2, json_out = run(tmp_path, "ks.json", args + ["--format", "json"])
        assert c1 == 0 and c2 == 0
        _, cols_c, rows_c = read_table(csv_out)
        _, cols_j, rows_j = read_table(json_out)
        assert cols_c == cols_j
        assert rows_c == rows_j

    def test_byte_identical_reruns(self, tmp_path):
        args = ["ks-eval", "--a", "0.5", "--m", "1.0", "--l", "0.0",
                "--z-min", "0.0", "--z-max", "4.0", "--z-count", "9"]
        _, o1 = run(tmp_path, "a.csv", args)
        _, o2 = run(tmp_path, "b.csv", args)
        assert o1.read_bytes() == o2.read_bytes()

    def test_pole_parameters_exit2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "ks-eval", "--a", "0.5", "--m", "1.0", "--l", "-3.0",
            "--z-min", "1.0",
        ])
        assert code == 2

    def test_missing_parameter_set_exit2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "ks-eval", "--alpha", "0.7", "--z-min", "1.0",
        ])
        assert code == 2


class TestKsLaplace:
    def test_against_library(self, tmp_path):
        from stretchrenew.transforms import ks_laplace

        code, out = run(tmp_path, "lap.csv", [
            "ks-laplace", "--alpha", "0.7", "--gamma", "0.1",
            "--nu", "0.8", "--eta-min", "0.5", "--eta-max", "2.0",
            "--eta-count", "4",
        ])
        assert code == 0
        params = KSParams.stretched(0.7, 0.1)
        _, _, rows = read_table(out)
        for eta, v in rows:
            assert v == pytest.approx(
                float(np.real(ks_laplace(params, 0.8, 1.0, eta))), rel=1e-14
            )

    def test_bad_sector_exit2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "ks-laplace", "--alpha", "0.7", "--gamma", "0.1",
            "--nu", "0.8", "--eta-min", "-1.0",
        ])
        assert code == 2


class TestSolve:
    def test_first_order(self, tmp_path):
        code, out = run(tmp_path, "s.csv", [
            "solve", "first", "--alpha", "0.7", "--gamma", "0.1",
            "--kappa", "1.0", "--t-min", "0.0", "--t-max", "1.0",
            "--t-count", "6",
        ])
        assert code == 0
        _, cols, rows = read_table(out)
        assert cols == ["t", "f", "residual"]
        params = KSParams.stretched(0.7, 0.1)
        for t, f, res in rows:
            assert f == pytest.approx(
                float(ks_eval(params, -t ** 0.8)), abs=1e-10
            )
            assert res < 1e-8

    def test_second_order(self, tmp_path):
        code, out = run(tmp_path, "s2.csv", [
            "solve", "second", "--alpha", "0.7", "--gamma", "0.1",
            "--a", "3.0", "--b", "2.0", "--t-min", "0.5",
        ])
        assert code == 0
        _, _, rows = read_table(out)
        assert rows[0][2] < 1e-8

    def test_missing_kappa_exit2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "solve", "first", "--alpha", "0.7", "--gamma", "0.1",
            "--t-min", "0.0",
        ])
        assert code == 2


class TestPmf:
    def test_laskin_normalized(self, tmp_path):
        code, out = run(tmp_path, "p.csv", [
            "pmf", "laskin", "--alpha", "0.7", "--gamma", "0.1",
            "--t", "1.0", "--nmax", "30",
        ])
        assert code == 0
        meta, _, rows = read_table(out)
        total = sum(r[1] for r in rows) + float(meta["truncation_mass"])
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_hat_requires_rates(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "pmf", "hat", "--alpha", "0.7", "--gamma", "0.1",
            "--t", "1.0", "--nmax", "5",
        ])
        assert code == 2

    def test_regime_gate_exit2(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "pmf", "laskin", "--alpha", "0.5", "--gamma", "0.8",
            "--t", "1.0", "--nmax", "5",
        ])
        assert code == 2


class TestSimulate:
    def test_seed_mandatory(self, tmp_path):
        code, _ = run(tmp_path, "x.csv", [
            "simulate", "renewal", "--alpha", "0.7", "--gamma", "0.1",
            "--horizon", "5.0",
        ])
        assert code == 2

    def test_renewal_deterministic(self, tmp_path):
        args = ["simulate", "renewal", "--alpha", "0.7", "--gamma", "0.1",
                "--horizon", "50.0", "--seed", "42"]
        _, o1 = run(tmp_path, "r1.csv", args)
        _, o2 = run(tmp_path, "r2.csv", args)
        assert o1.read_bytes() == o2.read_bytes()
        _, _, rows = read_table(o1)
        times = [r[1] for r in rows]
        assert len(times) >= 1
        assert times == sorted(times)
        assert times[-1] <= 50.0

    def test_laskin_draws(self, tmp_path):
        code, out = run(tmp_path, "l.csv", [
            "simulate", "laskin", "--alpha", "0.7", "--gamma", "0.1",
            "--t", "1.0", "--draws", "10", "--seed", "1",
        ])
        assert code == 0
        _, _, rows = read_table(out)
        assert len(rows) == 10
        assert all(r[1] == int(r[1]) and r[1] >= 0 for r in rows)

    def test_stream_changes_output(self, tmp_path):
        base = ["simulate", "laskin", "--alpha", "0.7", "--gamma", "0.1",
                "--t", "1.0", "--draws", "10", "--seed", "1"]
        _, o1 = run(tmp_path, "s0.csv", base + ["--stream", "0"])
        _, o2 = run(tmp_path, "s1.csv", base + ["--stream", "1"])
        _, _, r1 = read_table(o1)
        _, _, r2 = read_table(o2)
        assert [r[1] for r in r1] != [r[1] for r in r2]


class TestMoments:
    def test_analytic_column(self, tmp_path):
        code, out = run(tmp_path, "m.csv", [
            "moments", "--alpha", "0.7", "--gamma", "0.1", "--t", "1.0",
            "--draws", "5000", "--seed", "3",
        ])
        assert code == 0
        _, _, rows = read_table(out)
        labels = [r[0] for r in rows]
        assert labels == ["mean", "variance"]
        from scipy.special import gamma as sgamma

        expect = sgamma(1.1) / sgamma(1.8)
        assert rows[0][1] == pytest.approx(expect, rel=1e-12)
        # Monte Carlo column consistent with its own standard error
        assert abs(rows[0][2] - rows[0][1]) < 4.0 * rows[0][3]


class TestCompare:
    def test_report_mode(self, tmp_path):
        code, out = run(tmp_path, "c.csv", [
            "compare", "--alpha", "0.7", "--gamma", "0.0", "--t", "1.0",
            "--draws", "4000", "--seed", "5",
        ])
        assert code == 0
        _, _, rows = read_table(out)
        assert rows[0][0] == "max_abs_pmf_gap"
        assert 0.0 <= rows[0][1] < 0.05

    def test_assert_mode_failure_exit4(self, tmp_path):
        code, out = run(tmp_path, "c4.csv", [
            "compare", "--alpha", "0.7", "--gamma", "0.3", "--t", "1.0",
            "--draws", "4000", "--seed", "5", "--assert-mode",
            "--threshold", "0.01",
        ])
        assert code == 4
        # the artifact is still written on statistical failure
        assert out.exists()


class TestRenewalFn:
    def test_poisson_identity(self, tmp_path):
        code, out = run(tmp_path, "rf.csv", [
            "renewal-fn", "--alpha", "1.0", "--gamma", "0.0",
            "--t-min", "0.5", "--t-max", "2.0", "--t-count", "4",
        ])
        assert code == 0
        _, _, rows = read_table(out)
        for t, v in rows:
            assert v == pytest.approx(t, abs=1e-5)


class TestExitCodes:
    def test_bad_flag_exit2(self):
        assert main(["ks-eval", "--alpha", "oops", "--z-min", "1.0"]) == 2

    def test_unknown_command_exit2(self):
        assert main(["frobnicate"]) == 2

    def test_numeric_error_exit3(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise ToleranceError("no convergence")

        monkeypatch.setattr(cli, "ks_eval", boom)
        code = main([
            "ks-eval", "--alpha", "0.7", "--gamma", "0.1",
            "--z-min", "1.0", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 3

    def test_no_partial_output_on_error(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise ToleranceError("no convergence")

        monkeypatch.setattr(cli, "ks_eval", boom)
        out = tmp_path / "x.csv"
        main(["ks-eval", "--alpha", "0.7", "--gamma", "0.1",
              "--z-min", "1.0", "--out", str(out)])
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []  # no temp files left behind
