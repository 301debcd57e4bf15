import json
import shlex
import subprocess
import sys

import numpy as np
import pytest

from causalcodes.cli import OUT_DIR_ENV, run_cli


def _csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    return {h: rows[:, i] for i, h in enumerate(header)}


def _echo(text):
    for line in text.splitlines():
        if line.startswith("# command="):
            return shlex.split(json.loads(line.split("=", 1)[1]))[1:]
        if line.lstrip().startswith('"command"'):
            return shlex.split(json.loads(line.split(":", 1)[1].rstrip(",")))[1:]
    raise AssertionError("no command echo")


def test_capacity_erase(tmp_path):
    out = tmp_path / "c.csv"
    assert run_cli(["capacity", "--channel", "erase", "--p-min", "0", "--p-max", "0.5", "--step", "0.05",
                    "--out", str(out)]) == 0
    tab = _csv(out)
    assert len(tab["p"]) == 11
    assert np.array_equal(tab["capacity"], 1 - 2 * tab["p"])


def test_echo_reproduces_bytes(tmp_path):
    out = tmp_path / "t.csv"
    assert run_cli(["trajectories", "--n", "5000", "--p-prime", "0.125", "--eps", "0.08", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert run_cli(_echo(first.decode())) == 0
    assert out.read_bytes() == first
    sim = tmp_path / "s.json"
    argv = ["simulate", "--channel", "flip", "--n", "64", "--chunks", "8", "--msg-bits", "4", "--secret-bits", "1",
            "--p", "0.0625", "--eps", "0.1", "--adversary", "front", "--trials", "5", "--out", str(sim)]
    assert run_cli(argv) == 0
    first = sim.read_bytes()
    assert run_cli(_echo(first.decode())) == 0
    assert sim.read_bytes() == first


def test_out_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path))
    assert run_cli(["capacity", "--channel", "flip", "--p-max", "0.3", "--step", "0.1", "--out", "cap.csv"]) == 0
    tab = _csv(tmp_path / "cap.csv")
    assert tab["capacity"][0] == 1.0 and tab["capacity"][-1] == 0.0


def test_verify_entropy_gap_suite(capsys):
    assert run_cli(["verify", "--suite", "lemma"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_verify_intersection_grid(capsys):
    assert run_cli(["verify", "--suite", "intersection", "--grid"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert all(p["margin"] >= 0 for p in out["points"])


def test_verify_goodness_reports_failures(capsys):
    code = run_cli(["verify", "--suite", "goodness-bounds"])
    cap = capsys.readouterr()
    assert code == 1
    out = json.loads(cap.out)
    assert out["failures"] and all("t" in f for f in out["failures"])
    assert "FAIL" in cap.err


def test_verify_t_star_small(capsys):
    assert run_cli(["verify", "--suite", "t-star", "--samples", "50"]) == 0


def test_argument_errors(capsys):
    base = ["simulate", "--channel", "flip", "--n", "64", "--p", "0.0625", "--eps", "0.1"]
    assert run_cli(base + ["--adversary", "sideways"]) == 2
    assert "usage" in capsys.readouterr().err
    assert run_cli(["capacity"]) == 2
    assert run_cli(["frobnicate"]) == 2
    assert run_cli(["trajectories", "--n", "40001"]) == 2
    assert run_cli(["verify", "--suite", "conditions", "--p", "0.1", "--p-prime", "0.11"]) == 2


def test_goodness_command(capsys):
    assert run_cli(["goodness", "--n", "5000", "--p-prime", "0.125", "--eps", "0.08", "--samples", "20"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["decoys"] == 100 and 0 <= out["empirical_fraction"] <= 1


def test_simulate_erase(capsys):
    argv = ["simulate", "--channel", "erase", "--n", "64", "--chunks", "16", "--msg-bits", "4",
            "--secret-bits", "1", "--p", "0.25", "--eps", "0.25", "--adversary", "uniform", "--trials", "20"]
    assert run_cli(argv) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["counts"]["unique-wrong"] == 0 and sum(rep["counts"].values()) == 20


def test_help_and_entry_point():
    assert run_cli(["capacity", "--help"]) == 0
    res = subprocess.run([sys.executable, "-m", "causalcodes.cli", "verify", "--suite", "lemma"],
                         capture_output=True, text=True)
    assert res.returncode == 0


@pytest.mark.parametrize("suite", ["conditions"])
def test_verify_conditions_point(suite):
    assert run_cli(["verify", "--suite", suite]) == 0
