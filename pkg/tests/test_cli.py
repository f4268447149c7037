import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from spectral_cantor import __version__
from spectral_cantor.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stream=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, out = run(*argv)
    return code, json.loads(out)


class TestMetric:
    def test_two_points(self):
        code, out = run_json("metric", "0", "1", "--gamma", "0.5", "--connes")
        assert code == 0
        assert out["delta"][0][1] == pytest.approx(0.5)
        br = out["connes"][0]
        assert (br["bound_lower"], br["bound_upper"]) == (2.0, 8.0)
        assert 2.0 - 1e-9 <= br["lower"] <= br["upper"] <= 8.0
        assert out["violations"] == []
        assert out["version"] == __version__
        assert out["config"]["command"] == "metric"

    def test_self_distance(self):
        code, out = run_json("metric", "0110", "0110", "--gamma", "0.4")
        assert code == 0 and out["delta"][0][1] == 0.0

    def test_full_level_csv(self):
        code, out = run("metric", "--gamma", str(1 / 3), "--level", "4", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 17 and len(rows[0]) == 17
        M = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        np.testing.assert_array_equal(M, M.T)
        assert M.shape == (16, 16) and np.all(np.diag(M) == 0)

    def test_invalid_bits(self):
        assert run("metric", "012", "--gamma", "0.5")[0] == 2
        assert run("metric", "01", "--gamma", "1.5")[0] == 2

    def test_random_points(self):
        a = run("metric", "--random", "5", "--trunc", "8", "--gamma", "0.5", "--seed", "3")
        b = run("metric", "--random", "5", "--trunc", "8", "--gamma", "0.5", "--seed", "3")
        assert a == b and a[0] == 0


class TestOtherCommands:
    def test_trace(self):
        code, out = run_json("trace", "--gamma", "0.5", "--s", "2", "--horizon", "100")
        assert code == 0
        assert out["partial_sum"] == pytest.approx(2.0, rel=1e-12)
        assert {"spec", "s_or_p", "horizon", "partial_sum", "term_ratio", "verdict"} <= set(out)

    def test_trace_divergent(self):
        code, out = run_json("trace", "--gamma", "0.5", "--s", "1", "--horizon", "50")
        assert code == 0 and out["verdict"] == "divergent"

    def test_trace_needs_one_exponent(self):
        assert run("trace", "--gamma", "0.5", "--horizon", "5")[0] == 2
        assert run("trace", "--gamma", "0.5", "--s", "2", "--p", "1", "--horizon", "5")[0] == 2

    def test_connes_dist(self):
        code, out = run_json("connes-dist", "--gamma", "0.5", "--level", "2", "--x", "00", "--y", "01")
        assert code == 0
        assert out["value"] == pytest.approx(4 / np.sqrt(10), rel=1e-6)

    def test_embed_csv(self):
        code, out = run("embed", "1", "01", "--gamma", "0.3", "--trunc", "4", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][-3:] == ["gamma", "level", "bits"]
        assert float(rows[1][0]) == pytest.approx(0.7)

    def test_dimension(self):
        code, out = run_json("dimension", "--gamma", "0.5", "--trunc", "10")
        assert code == 0 and out["slope"] == pytest.approx(1.0, abs=1e-9)

    def test_gh(self):
        code, out = run_json("gh-bound", "--gamma", "0.5", "--mu", "0.25", "--trunc", "12")
        assert code == 0
        assert out["upper_bound"] == pytest.approx(1.0)
        assert out["correspondence"] <= 1.0 + 2**-11

    def test_matrix_triple(self):
        code, out = run_json("matrix-triple", "--n", "3", "--trials", "4")
        assert code == 0 and out["pass"] is True


class TestDispatch:
    def test_no_arguments(self):
        assert main([]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_deterministic(self):
        argv = ("connes-dist", "--gamma", "0.3", "--level", "3", "--x", "000", "--y", "110")
        assert run(*argv) == run(*argv)

    def test_out_file(self, tmp_path):
        p = tmp_path / "o.json"
        code, out = run("trace", "--gamma", "0.5", "--s", "2", "--horizon", "10", "--out", str(p))
        assert code == 0
        assert json.loads(p.read_text())["horizon"] == 10

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "spectral_cantor"], capture_output=True, text=True)
        assert proc.returncode == 2 and "usage" in proc.stderr

    def test_verify_all_quick(self):
        code, out = run_json("verify-all", "--quick")
        assert code == 0
        assert out["all_passed"] is True
        assert [r["number"] for r in out["results"]] == list(range(1, 14))
