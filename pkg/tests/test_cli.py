import json
import subprocess
import sys

import pytest

from leapfrog.cli import main


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


@pytest.fixture
def one_d(tmp_path):
    return write(tmp_path, "one_d.json", {"d": 1, "n": 2, "positions": ["0", "1", "sqrt(2)"],
                                          "targets": ["4", "6", "8.5"], "eps": "1/100"})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_exit_codes(tmp_path, capsys, one_d):
    code, out, _ = run(capsys, "check", one_d)
    assert code == 0 and json.loads(out)["verdict"] == "Dense"
    rational = write(tmp_path, "r.json", {"positions": [["0"], ["1/2"], ["1/3"]]})
    code, out, _ = run(capsys, "check", rational)
    assert code == 2 and json.loads(out)["w"] == ["6"]
    lattice = write(tmp_path, "l.json", {"positions": [["0", "0"], ["1", "sqrt(2)"], ["sqrt(3)", "1"]]})
    code, out, _ = run(capsys, "check", lattice)
    assert code == 2 and "n=2" in json.loads(out)["reason"]


def test_check_unknown(tmp_path, capsys):
    inst = write(tmp_path, "u.json", {"positions": ["0", "1", "sqrt(2 + sqrt(2))"],
                                      "effort": {"max_radius": 4}})
    code, out, _ = run(capsys, "check", inst)
    assert code == 3 and json.loads(out)["verdict"] == "Unknown"


def test_check_batch_with_jobs(tmp_path, capsys, one_d):
    rational = write(tmp_path, "r.json", {"positions": ["0", "1", "3/2"]})
    code, out, _ = run(capsys, "check", "--jobs", "2", one_d, rational)
    assert code == 2
    assert [r["verdict"] for r in json.loads(out)] == ["Dense", "NotDense"]


def test_plan_then_simulate_round_trip(tmp_path, capsys, one_d):
    plan = str(tmp_path / "plan.json")
    code, out, _ = run(capsys, "plan", one_d, "-o", plan)
    assert code == 0
    summary = json.loads(out)
    assert summary["moves"] == summary["counts"]["total"] > 0
    code, out, _ = run(capsys, "simulate", plan)
    report = json.loads(out)
    assert code == 0 and report["passed"] is True and report["matches_certificate"] is True
    assert report["max_deviation"] <= 0.01


def test_simulate_tampered_plan_fails(tmp_path, capsys, one_d):
    plan = tmp_path / "plan.json"
    run(capsys, "plan", one_d, "-o", str(plan))
    data = json.loads(plan.read_text())
    data["moves"] = data["moves"][:-1]
    plan.write_text(json.dumps(data))
    code, out, _ = run(capsys, "simulate", str(plan))
    report = json.loads(out)
    assert code == 1 and report["passed"] is False and report["matches_certificate"] is False


def test_simulate_empty_plan_keeps_configuration(tmp_path, capsys):
    inst = write(tmp_path, "same.json", {"positions": ["0", "1", "sqrt(2)"],
                                         "targets": ["0", "1", "sqrt(2)"], "eps": "1/1000"})
    plan = str(tmp_path / "plan.json")
    assert run(capsys, "plan", inst, "-o", plan)[0] == 0
    code, out, _ = run(capsys, "simulate", plan)
    report = json.loads(out)
    assert code == 0 and report["moves"] == 0
    assert report["final"] == [["0"], ["1"], ["sqrt(2)"]]


def test_simulate_exports(tmp_path, capsys, one_d):
    plan = str(tmp_path / "plan.json")
    run(capsys, "plan", one_d, "-o", plan)
    csv = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "simulate", plan, "--export", "csv", "--output", str(csv), "--stride", "100")
    assert code == 0
    assert csv.read_text().splitlines()[0] == "step,particle,x1"
    two_d = write(tmp_path, "two.json", {"positions": [["0", "0"], ["1", "0"], ["0", "1"], ["sqrt(2)", "sqrt(3)"]],
                                         "targets": [["0", "0"], ["1", "0"], ["0", "1"], ["sqrt(2)", "sqrt(3)"]],
                                         "eps": "1/10"})
    plan2 = str(tmp_path / "plan2.json")
    assert run(capsys, "plan", two_d, "-o", plan2)[0] == 0
    svg = tmp_path / "t.svg"
    assert run(capsys, "simulate", plan2, "--export", "svg", "--output", str(svg))[0] == 0
    assert svg.read_text().startswith("<svg")


def test_plan_errors(tmp_path, capsys):
    no_targets = write(tmp_path, "n.json", {"positions": ["0", "1", "sqrt(2)"], "eps": "1/10"})
    assert run(capsys, "plan", no_targets, "-o", str(tmp_path / "x.json"))[0] == 64
    rational = write(tmp_path, "r.json", {"positions": ["0", "1", "1/2"], "targets": ["0", "1", "1/3"],
                                          "eps": "1/100", "effort": {"max_radius": 1024, "max_retries": 1}})
    code, _, err = run(capsys, "plan", rational, "-o", str(tmp_path / "x.json"))
    assert code == 1 and "effort exhausted" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"positions": ["0", "1", "sqrt(-2)"]}')
    assert run(capsys, "check", str(bad))[0] == 64


def test_plan_refuses_huge_plans(tmp_path, capsys):
    two_d = write(tmp_path, "two.json", {"positions": [["0", "0"], ["1", "0"], ["0", "1"], ["sqrt(2)", "sqrt(3)"]],
                                         "targets": [["1", "1"], ["0", "2"], ["-1", "0"], ["3", "3"]],
                                         "eps": "1/10"})
    code, _, err = run(capsys, "plan", two_d, "-o", str(tmp_path / "p.json"), "--max-moves", "1000")
    assert code == 1 and "moves" in err


def test_overrides(tmp_path, capsys, one_d):
    code, out, _ = run(capsys, "show", one_d, "--eps", "1/8", "--precision", "200", "--effort-radius", "2**40",
                       "--effort-steps", "3")
    data = json.loads(out)
    assert data["eps"] == "1/8" and data["precision"] == 200
    assert data["effort"]["max_radius"] == str(2**40) and data["effort"]["max_retries"] == 3


def test_factor(capsys, tmp_path):
    code, out, _ = run(capsys, "factor", "[[1,2],[2,5]]")
    data = json.loads(out)
    assert code == 0 and data["length"] == "2"
    assert [(s["row"], s["col"], s["value"]) for s in data["steps"]] == [(2, 1, 2), (1, 2, 2)]
    code, out, _ = run(capsys, "factor", "[[1,0,0],[0,1,0],[0,0,1]]")
    assert code == 0 and json.loads(out)["steps"] == []
    code, out, _ = run(capsys, "factor", "[[1,1],[0,1]]")
    assert code == 1 and out.strip() == "not good"
    path = write(tmp_path, "m.json", {"matrix": [[1, 2], [2, 5]]})
    assert run(capsys, "factor", path)[0] == 0


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "leapfrog.cli", "factor", "[[1,2],[2,5]]"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and '"good": true' in out.stdout
