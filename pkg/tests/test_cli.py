import io
import json

import pytest

from npsbayes.cli import main
from npsbayes.ingest import load_state
from npsbayes.model import DirichletParams


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--json")
    assert code == 0, err
    return json.loads(out)


class TestEstimate:
    def test_first_quarter(self):
        r = run_json("estimate", "--counts", "136,82,188", "--prior", "1,1,1")
        assert r["point_estimate"] == 52 / 409
        assert r["posterior"] == [137.0, 83.0, 189.0]
        assert abs(r["hpd"]["lower"] - 0.038) <= 0.01
        assert abs(r["hpd"]["upper"] - 0.206) <= 0.01
        assert r["hpd"]["level_or_gamma"] == pytest.approx(0.95)
        assert r["moment_interval"]["level_or_gamma"] == 1.96
        assert "runtime_ms" not in r

    def test_empty_batch_echoes_prior(self):
        r = run_json("estimate", "--counts", "0,0,0", "--prior", "2,5,8")
        assert r["posterior"] == [2.0, 5.0, 8.0]
        assert r["point_estimate"] == pytest.approx(0.4)

    def test_point_estimate_independent_of_draws(self):
        a = run_json("estimate", "--counts", "10,20,30", "--draws", "100")
        b = run_json("estimate", "--counts", "10,20,30", "--draws", "50000")
        assert a["point_estimate"] == b["point_estimate"]
        assert a["mc_point_estimate"] != b["mc_point_estimate"]

    def test_sequential_state(self, tmp_path):
        state = tmp_path / "q.json"
        first = run_json("estimate", "--counts", "136,82,188", "--state", str(state), "--label", "Q1")
        assert first["posterior"] == [137.0, 83.0, 189.0]
        second = run_json("estimate", "--counts", "136,82,188", "--state", str(state), "--label", "Q2")
        assert second["prior"] == [137.0, 83.0, 189.0]
        assert second["posterior"] == [273.0, 165.0, 377.0]
        assert second["point_estimate"] == pytest.approx(0.12761, abs=1e-5)
        assert abs(second["hpd"]["lower"] - 0.072) <= 0.01
        assert abs(second["hpd"]["upper"] - 0.192) <= 0.01
        s = load_state(state)
        assert s.params == DirichletParams(273, 165, 377)
        assert [e.label for e in s.history] == ["Q1", "Q2"]

    def test_scores_file(self, tmp_path):
        csv = tmp_path / "s.csv"
        csv.write_text("score,label\n10,MX\n9,MX\n3,MX\n7,MX\n")
        r = run_json("estimate", "--scores", str(csv))
        assert r["counts"] == [1, 1, 2]
        assert r["label"] == "MX"

    def test_human_output(self):
        code, out, _ = run("estimate", "--counts", "136,82,188")
        assert code == 0
        assert "0.12714" in out
        assert "moment g=1.96" in out and "HPD 95%" in out

    def test_clipping_reported(self):
        code, out, _ = run("estimate", "--counts", "0,0,9", "--gamma", "3")
        assert code == 0
        assert "clipped" in out

    def test_conflicting_inputs(self, tmp_path):
        code, _, _ = run("estimate", "--counts", "1,2,3", "--scores", str(tmp_path / "x.csv"))
        assert code == 2

    def test_no_input(self):
        assert run("estimate")[0] == 2

    def test_invalid_prior(self):
        assert run("estimate", "--counts", "1,2,3", "--prior", "0,1,1")[0] == 2

    def test_prior_conflicts_with_state(self, tmp_path):
        state = tmp_path / "q.json"
        assert run("estimate", "--counts", "1,2,3", "--state", str(state))[0] == 0
        assert run("estimate", "--counts", "1,2,3", "--state", str(state), "--prior", "1,1,1")[0] == 2

    def test_unreadable_scores(self, tmp_path):
        code, _, err = run("estimate", "--scores", str(tmp_path / "missing.csv"))
        assert code == 3
        assert "data error" in err

    def test_bad_score_row(self, tmp_path):
        csv = tmp_path / "s.csv"
        csv.write_text("score\n9\n12\n")
        code, _, err = run("estimate", "--scores", str(csv))
        assert code == 3
        assert "row 3" in err

    def test_tampered_state(self, tmp_path):
        state = tmp_path / "q.json"
        run("estimate", "--counts", "136,82,188", "--state", str(state))
        data = json.loads(state.read_text())
        data["alpha"][0] = 140
        state.write_text(json.dumps(data))
        assert run("estimate", "--counts", "1,1,1", "--state", str(state))[0] == 3

    def test_timing_flag(self):
        r = run_json("estimate", "--counts", "1,2,3", "--timing")
        assert isinstance(r["runtime_ms"], int)


class TestSampleSize:
    def test_trivial(self):
        r = run_json("samplesize", "--lmax", "2.0", "--rho", "0.5", "--prior", "1,1,1")
        assert r["n_min"] == 1
        assert r["config"]["l_max"] == 2.0

    def test_human_trace(self):
        code, out, _ = run("samplesize", "--lmax", "0.3", "--rho", "0.1", "--L", "50", "--N", "200")
        assert code == 0
        assert out.startswith("minimum sample size n = ")
        assert "avg_length" in out

    def test_linear_strategy(self):
        r = run_json("samplesize", "--lmax", "0.5", "--rho", "0.1", "--L", "40", "--N", "100", "--strategy", "linear")
        assert [n for n, _ in r["evaluations"]] == list(range(1, r["n_min"] + 1))

    @pytest.mark.parametrize(
        "args", [("--lmax", "3"), ("--lmax", "0.1", "--rho", "1.2"), ("--lmax", "0.1", "--N", "10")]
    )
    def test_invalid_config(self, args):
        assert run("samplesize", *args)[0] == 2

    def test_nonconvergence(self):
        code, _, err = run("samplesize", "--lmax", "0.01", "--L", "10", "--N", "100", "--cap", "20")
        assert code == 4
        assert "not met" in err


class TestTables:
    ARGS = ("--lmax-grid", "0.4,0.6", "--rho-grid", "0.1,0.2", "--L", "40", "--N", "100")

    def test_markdown(self):
        code, out, _ = run("tables", *self.ARGS)
        assert code == 0
        assert "| l_max | rho=0.1 | rho=0.2 |" in out
        assert out.count("\n| 0.") == 2

    def test_csv_and_json_agree(self, tmp_path):
        path = tmp_path / "t.csv"
        assert run("tables", *self.ARGS, "--format", "csv", "--output", str(path))[0] == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "l_max,rho=0.1,rho=0.2"
        grid = [[int(v) for v in line.split(",")[1:]] for line in lines[1:]]
        doc = run_json("tables", *self.ARGS)
        assert doc["tables"][0]["n_min"] == grid
        assert doc["lmax_grid"] == [0.4, 0.6]

    def test_cheap_filter(self):
        doc = run_json("tables", "--lmax-grid", "0.02,0.4", "--rho-grid", "0.2", "--L", "20", "--N", "50", "--cheap")
        assert doc["lmax_grid"] == [0.4]

    def test_empty_after_filter(self):
        assert run("tables", "--lmax-grid", "0.02", "--cheap")[0] == 2

    def test_threads_identical_output(self):
        a = run("tables", *self.ARGS, "--json", "--threads", "1")
        b = run("tables", *self.ARGS, "--json", "--threads", "3")
        assert a == b


def test_bad_threads():
    assert run("estimate", "--counts", "1,1,1", "--threads", "0")[0] == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "npsbayes", "estimate", "--counts", "136,82,188", "--json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["posterior"] == [137.0, 83.0, 189.0]
