import json
from importlib import resources

import jsonschema
import pytest

from nctwist import cli
from nctwist.schemas import REPORT_SCHEMA

DATA = resources.files("nctwist") / "data"


def fixture(name):
    return str(DATA / f"{name}.json")


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_check_toy_ky1_reports_first_order_violation(capsys):
    code, rep, _ = run_main(capsys, "check", "--in", fixture("toy_ky1"))
    assert code == 1 and rep["status"] == "violations"
    failed = {c["name"] for c in rep["conditions"] if c["required"] and not c["pass"]}
    assert "nul1C" in failed
    assert rep["result"]["signs"]["epsilon"] == 1


def test_check_toy_ky0_passes(capsys):
    code, rep, _ = run_main(capsys, "check", "--in", fixture("toy_ky0"))
    assert code == 0 and rep["status"] == "pass"


def test_break_toy(capsys):
    code, rep, _ = run_main(capsys, "break", "--in", fixture("toy_ky1"))
    assert code == 0
    assert rep["result"]["signature"]["blocks"] == [1, 1, 1]
    assert rep["result"]["dim"] == 6


def test_break_with_decomposition(capsys):
    code, rep, _ = run_main(capsys, "break", "--in", fixture("toy_ky1_2twist"), "--decomposition", "2twist")
    assert code == 0 and rep["result"]["dim"] == 6
    code, _, err = run_main(capsys, "break", "--in", fixture("toy_ky1"), "--decomposition", "2twist")
    assert code == 2 and "--decomposition" in err


def test_search(capsys):
    code, rep, _ = run_main(capsys, "search", "--in", fixture("toy_ky1"), "--decomposition", "2twist")
    assert code == 0
    res = rep["result"]
    assert res["assignments"] == len(res["results"]) > 0
    assert all(r["signature"]["blocks"] == [1, 1, 1] for r in res["results"])


def test_search_decomposition_needs_toy(capsys):
    code, _, err = run_main(capsys, "search", "--in", fixture("lr_one_generation"), "--decomposition", "2twist")
    assert code == 2 and "toy" in err


def test_fluctuate(capsys, tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["fluctuate", "--in", fixture("toy_ky0"), "--pairs", "random:3", "--symmetrize",
                     "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["form_selfadjoint"] is True
    assert rep["result"]["triple"]["schema"] == "nctwist-triple/v1"


def test_fluctuate_pairs_file(capsys, tmp_path):
    pf = tmp_path / "pairs.json"
    unit = [1.0, 0.0, 1.0, 0.0] + [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]
    pf.write_text(json.dumps({"component": None, "pairs": [[unit, unit]]}))
    code, rep, _ = run_main(capsys, "fluctuate", "--in", fixture("toy_ky0"), "--pairs", str(pf))
    assert code == 0 and rep["result"]["pairs"] == 1


def test_gauge(capsys):
    code, rep, _ = run_main(capsys, "gauge", "--in", fixture("toy_mild_ky0"), "--pairs", "random:2", "--seed", "5")
    assert code == 0 and rep["seed"] == 5
    assert len(rep["result"]["u"]) == 12
    assert all(c["pass"] for c in rep["conditions"] if c["required"])


def test_reports_validate_and_are_deterministic(capsys):
    args = ["gauge", "--in", fixture("toy_ky0"), "--pairs", "random:2", "--seed", "3"]
    cli.main(args)
    first = capsys.readouterr().out
    cli.main(args)
    second = capsys.readouterr().out
    assert first == second
    jsonschema.validate(json.loads(first), REPORT_SCHEMA)


def test_tolerance_override(capsys):
    code, rep, _ = run_main(capsys, "check", "--in", fixture("toy_ky0"), "--rtol", "1e-6", "--atol", "1e-10")
    assert rep["tolerance"] == {"atol": 1e-10, "rtol": 1e-6}
    code, _, err = run_main(capsys, "check", "--in", fixture("toy_ky0"), "--rtol", "0")
    assert code == 2 and "rtol" in err


def test_missing_file(capsys):
    code, _, err = run_main(capsys, "check", "--in", "/nonexistent/x.json")
    assert code == 2 and "--in" in err


def test_malformed_json_reports_line(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "nctwist-triple/v1",\n "D": [1,\n')
    code, _, err = run_main(capsys, "check", "--in", str(bad))
    assert code == 2 and "line 3" in err


def test_schema_violation_reports_field(capsys, tmp_path):
    doc = json.loads((DATA / "toy_ky0.json").read_text())
    doc["twists"][0]["nu_l"][0][0] = ["x", 0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run_main(capsys, "check", "--in", str(bad))
    assert code == 2 and "twists/0/nu_l" in err


def test_bad_pairs(capsys, tmp_path):
    code, _, err = run_main(capsys, "fluctuate", "--in", fixture("toy_ky0"), "--pairs", "random:x")
    assert code == 2 and "--pairs" in err
    pf = tmp_path / "p.json"
    pf.write_text(json.dumps([[[1, 2], [3]]]))
    code, _, err = run_main(capsys, "fluctuate", "--in", fixture("toy_ky0"), "--pairs", str(pf))
    assert code == 2 and "pairs/0/0" in err
    code, _, err = run_main(capsys, "fluctuate", "--in", fixture("toy_ky0"), "--pairs", "random:2@5")
    assert code == 2 and "component" in err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as e:
        cli.main(["explode", "--in", fixture("toy_ky0")])
    assert e.value.code == 2


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig("check", rtol=-1.0)
    with pytest.raises(ValueError):
        cli.RunConfig("nope")
    code, rep = cli.run(cli.RunConfig("check", input=fixture("toy_ky0")))
    assert code == 0 and list(rep)[:4] == ["schema", "command", "input", "seed"]
