import json
import logging

import pytest

from main import run
from utils.logger import logger, set_level

DESK = ["--override", "k=1", "--override", "eps1=1/10", "--override", "delta=1/100"]


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_examples_emits_input_document(capsys):
    assert run(["examples", "or", "--n", "3", "--p", "1/3"]) == 0
    doc = _json(capsys)
    assert doc["function"]["name"] == "or"
    assert doc["space"] == {"n": 3, "space": {"kind": "p-biased", "p": "1/3"}}


def test_decompose_dictator(capsys):
    assert run(["decompose", "--builtin", "dictator", "--n", "2", "--param", "i=0"]) == 0
    report = _json(capsys)
    assert report["command"] == "decompose"
    outputs = report["outputs"]
    assert outputs["parseval"]["ok"] is True
    by_set = {tuple(c["S"]): c for c in outputs["components"]}
    assert by_set[(0,)]["l2sq"] == "1/4"
    assert by_set[(1,)]["l2sq"] == "0"


def test_influence_of_or(capsys):
    assert run(["influence", "--builtin", "or", "--n", "3", "--p", "1/3", "--method", "exact"]) == 0
    outputs = _json(capsys)["outputs"]
    assert outputs["influences"] == ["16/81"] * 3
    assert outputs["total"] == "16/27"


def test_construct_with_overrides(capsys):
    assert run(["construct", "--builtin", "dictator", "--n", "3", "--param", "i=0", "--checks", *DESK]) == 0
    report = _json(capsys)
    assert report["outputs"]["l1_error"] == "0"
    assert report["outputs"]["h"] == [0, 0, 0, 0, 1, 1, 1, 1]
    assert all(report["outputs"]["checks"].values())
    assert report["overrides"] == {"k": "1", "eps1": "1/10", "delta": "1/100"}
    assert "schedule" not in report["outputs"]


def test_construct_refuses_full_schedule(capsys):
    assert run(["construct", "--builtin", "dictator", "--n", "3", "--param", "i=0"]) == 1
    assert capsys.readouterr().out == ""


def test_schedule_only(capsys):
    assert run(["construct", "--builtin", "or", "--n", "3", "--schedule-only"]) == 0
    report = _json(capsys)
    assert report["schedule"]["fields"]["k"]["value"] == "10000"
    assert report["schedule"]["fields"]["delta"]["value"] is None


def test_verify_parseval_passes(capsys):
    assert run(["verify", "--suite", "parseval", "--n", "3", "--trials", "20", "--seed", "7"]) == 0
    report = _json(capsys)
    assert report["outputs"]["passed"] is True
    assert report["outputs"]["suites"]["parseval"]["invariants"]["parseval"] == {"passed": 20, "total": 20}


def test_verify_unknown_suite(capsys):
    assert run(["verify", "--suite", "nope"]) == 1


def test_sweep_writes_csv(capsys):
    assert run(["sweep", "--builtin", "or", "--n", "3", "--grid", "0.2,0.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "p,mu,total_influence,russo_lhs,residual,tolerance,within_tolerance"
    assert len(lines) == 3
    assert all(line.endswith("true") for line in lines[1:])


def test_boost_not_found(capsys):
    args = ["boost", "--builtin", "majority", "--n", "5", "--epsilon", "0", "--max-size", "2"]
    assert run(args) == 0
    outputs = _json(capsys)["outputs"]
    assert outputs["found"] is False
    assert outputs["max_size"] == 2


def test_pseudojunta_from_file(tmp_path, capsys):
    path = tmp_path / "or4.json"
    assert run(["examples", "or-example", "--n", "4", "--p", "1/4", "--out", str(path)]) == 0
    assert run(["pseudojunta", "cost", "--in", str(path)]) == 0
    outputs = _json(capsys)["outputs"]
    assert outputs["cost"] == "1"
    assert outputs["method"] == "exact"


def test_reports_are_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    args = ["influence", "--builtin", "majority", "--n", "5", "--method", "mc", "--samples", "2000", "--seed", "3"]
    assert run([*args, "--out", str(first)]) == 0
    assert run([*args, "--out", str(second)]) == 0
    assert first.read_text() == second.read_text()


def test_missing_input_is_a_domain_error():
    assert run(["influence"]) == 1


def test_bad_json_input(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["decompose", "--in", str(path)]) == 1


@pytest.mark.parametrize("doc", [
    {"builtin": "or", "n": "x"},
    {"space": {"n": 2, "space": {"kind": "p-biased"}}, "function": {"kind": "builtin", "name": "or"}},
    {"space": {"n": 2, "space": {"kind": "p-biased", "p": "1/2"}}, "function": "or"},
])
def test_malformed_input_document(tmp_path, capsys, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(["influence", "--in", str(path)]) == 1
    assert capsys.readouterr().out == ""


def test_malformed_coords():
    args = ["pseudojunta", "cost", "--builtin", "or", "--n", "3", "--collection", "junta", "--coords", "0,x"]
    assert run(args) == 1


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["construct", "--mode", "bogus"])
    assert exc.value.code == 2


def test_log_level_override(capsys):
    try:
        assert run(["--log-level", "error", "examples", "or", "--n", "2"]) == 0
        assert logger.getEffectiveLevel() == logging.ERROR
    finally:
        set_level("INFO")
    assert _json(capsys)["space"]["n"] == 2
