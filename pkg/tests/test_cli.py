import json
import os
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from natpatl.cli import main

GOLDEN = Path(__file__).parent / "golden"
SCHEMA = json.loads(resources.files("natpatl").joinpath("report.schema.json").read_text())

CASES = {
    "coin": ["check", "coin.cgs", "--formula", "<<a>>[>=1/2,k=1] F heads", "--formula", "<<a>>[>=1/2,k=1] G F heads"],
    "maze": [
        "check", "maze.cgs",
        "--formula", "<<C>>[>=1/2,k=2] F t0",
        "--formula", "<<C>>[>=1/2,k=2] (F t0 & F t1)",
        "--formula", "!<<C>>[>0,k=1] X t1",
    ],
    "voting": [
        "check", "voting.cgs", "--vocab", str(GOLDEN / "top.vocab"),
        "--formula", "<<v>>[>=0.9,k=4] F (sigOk_s | sigFail_s)",
        "--formula", "!<<v>>[>=0.5,k=5] F (rec_v_r & !shreded_r)",
    ],
}


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def stable(report):
    report = dict(report)
    report.pop("timing")
    return report


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name, capsys):
    code, out, _ = run(CASES[name] + ["--json"], capsys)
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    golden = GOLDEN / f"{name}.json"
    if os.environ.get("NATPATL_REGOLD"):
        golden.write_text(json.dumps(stable(report), indent=2, sort_keys=True) + "\n")
    assert stable(report) == json.loads(golden.read_text())
    verdicts = {r["verdict"] for r in report["results"]}
    assert code == (0 if verdicts == {"true"} else 1)


def test_reports_are_byte_stable(capsys):
    outs = [run(CASES["maze"] + ["--json"], capsys)[1] for _ in range(2)]
    a, b = (json.dumps(stable(json.loads(o)), indent=2, sort_keys=True) for o in outs)
    assert a == b


def test_exit_codes(capsys, tmp_path):
    assert run(["check", "coin.cgs", "--formula", "<<a>>[>=1/2,k=1] F heads"], capsys)[0] == 0
    assert run(["check", "coin.cgs", "--formula", "<<a>>[>1/2,k=1] F heads"], capsys)[0] == 1
    model = tmp_path / "third.cgs"
    model.write_text(
        "agents a\nprops goal\nactions go\nstate s {}\nstate g {goal}\nstate d {}\nlegal * a {go}\n"
        "trans s (go) -> {s: 1/4, g: 1/4, d: 1/2}\ntrans g (go) -> {g: 1}\ntrans d (go) -> {d: 1}\ninit s\n"
    )
    unknown = ["check", str(model), "--solve", "iter:1/1000000", "--formula", "<<a>>[>=1/3,k=1] F goal"]
    assert run(unknown, capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 3
    assert run(["check", "coin.cgs", "--formula", "<<zz>>[>=1/2,k=1] F heads"], capsys)[0] == 4
    assert run(["check", str(tmp_path / "missing.cgs"), "--formula", "T"], capsys)[0] == 4
    bad = tmp_path / "bad.cgs"
    bad.write_text("agents a\nbogus line\n")
    code, _, err = run(["check", str(bad), "--formula", "T"], capsys)
    assert code == 4 and "2" in err


def test_text_output_names_the_witness(capsys):
    code, out, _ = run(CASES["coin"][:4], capsys)
    assert code == 0
    assert out.startswith("true")
    assert "(T -> toss)" in out and "p = 1/2" in out


def test_simulate(capsys, tmp_path):
    argv = ["simulate", "maze.cgs", "--profile", "maze_openall.nstrat,maze_env_open.nstrat",
            "--until", "F t0", "--n", "500", "--seed", "4", "--json"]
    code, out, _ = run(argv, capsys)
    first = json.loads(out)
    assert code == 0 and first["schema"] == "natpatl.simulation/1" and first["n"] == 500
    assert json.loads(run(argv, capsys)[1]) == first
    traces = tmp_path / "plays.txt"
    run(["simulate", "coin.cgs", "--profile", str(GOLDEN / "toss.nstrat"), "--until", "F heads",
         "--n", "10", "--traces", str(traces), "--traces-n", "3"], capsys)
    assert len(traces.read_text().splitlines()) == 3


def test_simulate_seed_from_environment(capsys, monkeypatch):
    argv = ["simulate", "coin.cgs", "--profile", str(GOLDEN / "toss.nstrat"), "--until", "F heads", "--n", "400", "--json"]
    monkeypatch.setenv("NATPATL_SEED", "9")
    a = json.loads(run(argv, capsys)[1])
    b = json.loads(run(argv + ["--seed", "1"], capsys)[1])
    assert a["seed"] == b["seed"] == 9
    assert a == b


def test_enumerate(capsys):
    code, out, _ = run(["enumerate", "maze.cgs", "--agent", "C", "--k", "2"], capsys)
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert len(rows) == 10 and all(int(c) <= 2 for c, _ in rows)
    assert ["1", "(T -> openall)"] in rows and ["2", "(t1 -> openall) (T -> closeleft)"] in rows


def test_encode(capsys, tmp_path):
    out = tmp_path / "q.smt2"
    code, _, _ = run(["encode", "coin.cgs", "--formula", "<<a>>[>=1/2,k=1] F heads", "--out", str(out)], capsys)
    assert code == 0
    assert "(set-logic QF_NRA)" in out.read_text()
    assert json.loads(Path(str(out) + ".json").read_text())


def test_export(capsys):
    code, out, _ = run(["export", "coin.cgs", "--profile", str(GOLDEN / "toss.nstrat")], capsys)
    assert code == 0 and out.startswith("states ")
    code, out, _ = run(["export", "coin.cgs", "--hoa", "G F heads"], capsys)
    assert code == 0 and out.startswith("HOA: v1")
