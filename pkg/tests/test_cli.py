import json
import os
import shutil
import subprocess
import sys

import pytest

from wittlab.cli import main, run_job

JOBS = [
    ["nu", "--ring", "GF(2)[t]/(t^2)", "--degree", "1"],
    ["nutilde", "--ring", "GF(2)[t]/(t^2)", "--degree", "1"],
    ["dlog", "--ring", "GF(2)[t]/(t^3)", "--degree", "1"],
    ["drw", "--ring", "GF(2)[t]/(t^2)", "--r", "2", "--degree", "1", "--identities"],
    ["drw-log", "--ring", "GF(2)[t]/(t^3)", "--r", "2", "--degree", "1"],
    ["pi-fbar", "--ring", "GF(2)", "--r", "2", "--degree", "0"],
    ["witt", "--p", "2", "--r", "2"],
    ["tc-perfect", "--ring", "GF(4)", "--r", "2"],
    ["tr-ring", "--ring", "GF(2)", "--s", "1"],
    ["k-smooth", "--ring", "GF(4)", "--degree", "0"],
    ["rigidity", "--ring", "GF(2)[t]/(t^4)", "--ideal", "t^2", "--degree", "1"],
    ["hensel", "--ring", "GF(2)[t]/(t^4)", "--poly", "x^2+x+t", "--alpha0", "0"],
    ["tower", "--p", "2", "--example", "multiplication", "--e", "2", "--window", "6"],
    ["dieudonne", "--p", "2", "--precision", "4"],
    ["discont", "--weights", "1,2", "--stage", "3"],
    ["discont", "--form", "0-1,2-3", "--dim", "4"],
]


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv", JOBS, ids=lambda a: a[0] + "-" + str(len(a)))
def test_every_subcommand_succeeds(capsys, argv):
    code, out, err = _run(capsys, argv)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["schema"] == "wittlab/1"
    assert doc["command"] == argv[0]
    assert "provenance" in doc and "wall_time_s" not in doc


def test_nu_output(capsys):
    _, out, _ = _run(capsys, JOBS[0])
    doc = json.loads(out)
    assert doc["nu"] == [2] and doc["nu_tilde"] == []


def test_tc_perfect_output(capsys):
    _, out, _ = _run(capsys, ["tc-perfect", "--ring", "GF(4)", "--r", "2"])
    doc = json.loads(out)
    assert doc["pi0"] == [4] and doc["pi_minus1"] == [4]


@pytest.mark.parametrize("argv,code,kind", [
    (["nu", "--ring", "GF(6)[t]", "--degree", "1"], 2, None),
    (["nu", "--ring", "GF(2)[t]/(t^2", "--degree", "1"], 2, None),
    (["nu", "--ring", "GF(2)[t]/(t^2)"], 2, "ArgumentError"),
    (["k-smooth", "--ring", "GF(2)[t]/(t^2)", "--degree", "0"], 3, "NotSmoothGuard"),
    (["bogus"], 2, "ArgumentError"),
])
def test_error_exit_codes(capsys, argv, code, kind):
    got, out, err = _run(capsys, argv)
    assert got == code
    assert out == ""
    doc = json.loads(err)
    assert doc["error"]["exit_code"] == code
    if kind:
        assert doc["error"]["code"] == kind


def test_timing_flag(capsys):
    code, out, _ = _run(capsys, ["--timing", "witt", "--p", "2", "--r", "1"])
    assert code == 0 and "wall_time_s" in json.loads(out)


def test_formats(capsys):
    _, table, _ = _run(capsys, ["--format", "table"] + JOBS[0])
    assert "nu" in table and not table.lstrip().startswith("{")
    _, csv_out, _ = _run(capsys, ["--format", "csv"] + JOBS[0])
    assert csv_out.splitlines()[0].count(",") >= 1


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("ring=GF(2)[t]/(t^2)\ndegree=1\n")
    code, out, err = _run(capsys, ["--config", str(cfg), "nu"])
    assert code == 0, err
    assert json.loads(out)["nu"] == [2]


def test_batch(capsys, tmp_path):
    batch = tmp_path / "b.txt"
    batch.write_text("# comment\nnu --ring GF(2)[t]/(t^2) --degree 1\ntc-perfect --ring GF(4) --r 2\n")
    code, out, _ = _run(capsys, ["--batch", str(batch), "--jobs", "1"])
    docs = json.loads(out)
    assert code == 0 and [d["command"] for d in docs] == ["nu", "tc-perfect"]


def test_deterministic_output(capsys):
    outs = []
    for _ in range(2):
        chunk = []
        for argv in JOBS:
            _, out, _ = _run(capsys, argv)
            chunk.append(out)
        outs.append("".join(chunk).encode())
    assert outs[0] == outs[1]


def test_run_job_document():
    code, doc = run_job(["witt", "--p", "3", "--r", "2"])
    assert code == 0 and doc["inputs"]["p"] == 3


@pytest.mark.skipif(shutil.which("wittlab") is None, reason="console script not installed")
def test_console_script():
    env = dict(os.environ)
    res = subprocess.run(["wittlab", "witt", "--p", "2", "--r", "1"], capture_output=True,
                         text=True, env=env, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "witt"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wittlab.cli", "cache"], capture_output=True,
                         text=True, timeout=120)
    assert res.returncode == 0, res.stderr
