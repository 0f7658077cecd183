import io
import json
import subprocess
import sys

import pytest

from oracles import scan
from sl2free import cli
from sl2free.mat2 import IDENTITY, Mat2, NotUnimodularError


def run(argv, stdin=""):
    """Run the CLI in-process; returns (code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdin, sys.stdout, sys.stderr
    sys.stdin, sys.stdout, sys.stderr = io.StringIO(stdin), out, err
    try:
        code = cli.dispatch(argv)
    finally:
        sys.stdin, sys.stdout, sys.stderr = old
    return code, out.getvalue(), err.getvalue()


def test_parse_matrix_line():
    assert cli.parse_matrix_line("1 0 0 1") == IDENTITY
    assert cli.parse_matrix_line("5 1 4 1") == Mat2(5, 1, 4, 1)
    with pytest.raises(NotUnimodularError, match=r"not unimodular \(det = -2\)"):
        cli.parse_matrix_line("1 2 3 4")


def test_count_row():
    code, out, err = run(["count", "--X", "10", "--Q", "1"])
    assert code == 0
    assert out.splitlines() == ["X,Q,norm,subgroup,count", f"10,1,height,gamma0,{len(scan(10))}"]
    assert json.loads(err)["output_sha256"]


def test_certify_and_relate():
    code, out, _ = run(["certify"], "5 1 4 1\n12 -5 5 -2\n")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "Certified" and len(rep["witness_disks"]) == 4
    code, out, _ = run(["relate", "--max-len", "3"], "0 -1 1 -1\n")
    assert code == 0 and json.loads(out)["found"] is True and json.loads(out)["word"] == "a a a"
    code, out, _ = run(["relate", "--max-len", "4"], "# comment\n5 1 4 1\n12 -5 5 -2  # second\n")
    assert json.loads(out)["found"] is False


def test_usage_errors_exit_1():
    assert run(["frobnicate"])[0] == 1
    assert run([])[0] == 1
    code, _, err = run(["certify"], "1 2 3 4\n")
    assert code == 1 and "det = -2" in err
    assert run(["count"])[0] == 1
    assert run(["count", "--X", "3", "--threads", "0"])[0] == 1
    assert run(["census", "--X", "400"])[0] == 1


def test_check_failure_exit_2(monkeypatch):
    from sl2free import experiments

    real = experiments.gamma0_size_check

    def broken(Q_list, X_list):
        rows = real(Q_list, X_list)
        rows[0].phi_lower_bound = rows[0].count + 1
        return rows

    monkeypatch.setattr(cli, "gamma0_size_check", broken)
    assert run(["gamma0", "--X", "20", "--Q", "2"])[0] == 2
    monkeypatch.undo()
    assert run(["gamma0", "--X", "20", "--Q", "2"])[0] == 0


def test_config_and_env_precedence(tmp_path, monkeypatch):
    conf = tmp_path / "run.conf"
    conf.write_text("# sample run\nX = 12\nsamples = 5\nseed = 9\n")
    base = run(["sample", "--config", str(conf)])[1]
    assert len(base.splitlines()) == 5
    assert run(["sample", "--X", "12", "--samples", "5", "--seed", "9"])[1] == base
    # flag beats file
    assert run(["sample", "--config", str(conf), "--seed", "10"])[1] == run(
        ["sample", "--X", "12", "--samples", "5", "--seed", "10"])[1]
    # file beats environment, environment beats the built-in default
    monkeypatch.setenv("SL2FREE_SEED", "10")
    assert run(["sample", "--config", str(conf)])[1] == base
    assert run(["sample", "--X", "12", "--samples", "5"])[1] != run(
        ["sample", "--X", "12", "--samples", "5", "--seed", "0"])[1]
    bad = tmp_path / "bad.conf"
    bad.write_text("nonsense = 1\n")
    assert run(["count", "--config", str(bad)])[0] == 1


def test_manifest_and_replay(tmp_path):
    out = tmp_path / "census.csv"
    code, _, _ = run(["census", "--X-grid", "5,8", "--out", str(out), "--threads", "4"])
    assert code == 0
    man = json.loads((tmp_path / "census.csv.manifest.json").read_text())
    assert set(man) >= {"command_line", "config", "seed", "code_version", "timestamp", "output_sha256"}
    for t in ("1", "4"):
        again = tmp_path / f"again{t}.csv"
        code, _, err = run(["replay", str(tmp_path / "census.csv.manifest.json"), "--threads", t, "--out", str(again)])
        assert code == 0 and "matches" in err
        assert again.read_bytes() == out.read_bytes()
    man["output_sha256"] = "0" * 64
    fake = tmp_path / "fake.json"
    fake.write_text(json.dumps(man))
    assert run(["replay", str(fake)])[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["census", "--X", "9"],
        ["census", "--X", "30", "--mode", "mc", "--samples", "9000"],
        ["rate", "--X", "40", "--samples", "200", "--max-word-len", "6"],
        ["fr", "--X", "50", "--samples", "5000"],
    ],
)
def test_threads_do_not_change_output(argv):
    one = run(argv + ["--threads", "1", "--seed", "4"])[1]
    four = run(argv + ["--threads", "4", "--seed", "4"])[1]
    assert one == four and one


def test_json_and_fit(tmp_path):
    code, out, _ = run(["phi3", "--X-grid", "20,40,80", "--json"])
    data = json.loads(out)
    assert code == 0 and all(r["cube_ok"] == 1 for r in data["rows"]) and "slope" in data
    csv_path = tmp_path / "c.csv"
    csv_path.write_text("X,nonpingpong_pairs\n10,1000\n20,8000\n40,64000\n")
    code, out, _ = run(["fit", str(csv_path)])
    assert code == 0 and out.splitlines()[1].startswith("3.000000,")


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "sl2free", "count", "--X", "2", "--subgroup", "full"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.splitlines()[1] == "2,1,height,full,52"
