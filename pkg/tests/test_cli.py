import json

import pytest

from corrsense.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDeploy:
    def test_writes_deterministic_file(self, tmp_path, capsys):
        out = tmp_path / "dep.txt"
        code, _, _ = run_cli(capsys, "deploy", "--seed", "7",
                             "--out", str(out))
        assert code == 0
        first = out.read_bytes()
        run_cli(capsys, "deploy", "--seed", "7", "--out", str(out))
        assert out.read_bytes() == first
        assert first.startswith(b"field,120.000000,120.000000\nseed,7\n")

    def test_stdout_by_default(self, capsys):
        code, out, _ = run_cli(capsys, "deploy", "--seed", "1",
                               "--normals", "3", "--grid-rows", "1",
                               "--grid-cols", "1")
        assert code == 0
        lines = out.splitlines()
        assert sum(1 for l in lines if l.startswith("CH,")) == 1
        assert sum(1 for l in lines if l.startswith("N,")) == 3
        assert sum(1 for l in lines if l.startswith("T,")) == 1


class TestCluster:
    def test_pipeline_partition(self, tmp_path, capsys):
        dep = tmp_path / "dep.txt"
        run_cli(capsys, "deploy", "--seed", "7", "--out", str(dep))
        code, out, _ = run_cli(capsys, "cluster", "--deployment", str(dep))
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "head,members"
        assert len(rows) == 26
        members = [int(i) for row in rows[1:] if row.split(",")[1]
                   for i in row.split(",")[1].split(";")]
        assert sorted(members) == list(range(1, 101))

    def test_json_format(self, tmp_path, capsys):
        dep = tmp_path / "dep.txt"
        run_cli(capsys, "deploy", "--seed", "7", "--out", str(dep))
        code, out, _ = run_cli(capsys, "cluster", "--deployment", str(dep),
                               "--format", "json")
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 25


class TestAccuracy:
    def test_closed_form_reports(self, tmp_path, capsys):
        dep = tmp_path / "dep.txt"
        run_cli(capsys, "deploy", "--seed", "7", "--out", str(dep))
        code, out, _ = run_cli(capsys, "accuracy", "--deployment", str(dep))
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "head_id,m,method,d_a,distortion,std_err,samples"
        assert len(rows) == 26

    def test_monte_carlo_json(self, tmp_path, capsys):
        dep = tmp_path / "dep.txt"
        run_cli(capsys, "deploy", "--seed", "3", "--grid-rows", "2",
                "--grid-cols", "2", "--normals", "8", "--out", str(dep))
        code, out, _ = run_cli(capsys, "accuracy", "--deployment", str(dep),
                               "--method", "monte_carlo", "--samples", "2000",
                               "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert len(payload["reports"]) == 4
        assert all(r["mc_samples"] == 2000 for r in payload["reports"])


class TestExperiment:
    def test_setup1_csv(self, capsys):
        code, out, _ = run_cli(capsys, "experiment", "setup1")
        assert code == 0
        body = [l for l in out.splitlines() if not l.startswith("#")]
        assert body[0] == "head,members,d_a"
        assert len(body) == 26

    def test_rerun_byte_identical(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run_cli(capsys, "experiment", "fig5", "--out", str(a))
        run_cli(capsys, "experiment", "fig5", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_flag_overrides(self, capsys):
        code, out, _ = run_cli(capsys, "experiment", "setup1",
                               "--seed", "42", "--theta1", "200")
        assert code == 0
        assert "seed=42" in out and "theta1=200" in out

    def test_runs_flag(self, capsys):
        code, out, _ = run_cli(capsys, "experiment", "setup2", "--runs", "3")
        assert code == 0
        assert "runs=3" in out


class TestConfigFile:
    def test_file_supplies_flags(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("seed = 42\ntheta1 = 200  # wide kernel\n")
        code, out, _ = run_cli(capsys, "experiment", "setup1",
                               "--config", str(conf))
        assert code == 0
        assert "seed=42" in out and "theta1=200" in out

    def test_explicit_flag_wins(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("seed = 42\n")
        code, out, _ = run_cli(capsys, "experiment", "setup1",
                               "--config", str(conf), "--seed", "9")
        assert code == 0
        assert "seed=9" in out

    def test_malformed_file(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("seed 42\n")
        code, _, err = run_cli(capsys, "experiment", "setup1",
                               "--config", str(conf))
        assert code != 0
        assert "error" in err


class TestFailures:
    def test_missing_deployment_file(self, capsys):
        code, _, err = run_cli(capsys, "cluster", "--deployment", "/nope.txt")
        assert code != 0
        assert err.startswith("corrsense: error:")

    def test_invalid_theta(self, capsys):
        code, _, err = run_cli(capsys, "accuracy", "--theta1", "-5")
        assert code != 0
        assert "theta1" in err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
