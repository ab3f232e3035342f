import json
import math
import os
from pathlib import Path

import pytest

import toolforge

FIXTURES = Path(os.environ.get("TOOLFORGE_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "tests" / "fixtures"


def test_parse_and_normalize():
    line = "[get_weather_data(coordinates=[45.4215, -75.6972]), calc_binomial_probability(n=10, k=5.0, p=0.5)]"
    calls = toolforge.parse_calls(line)
    assert [c["name"] for c in calls] == ["get_weather_data", "calc_binomial_probability"]
    assert calls[1]["arguments"] == {"n": 10, "k": 5.0, "p": 0.5}
    assert toolforge.normalize_calls("[f(a = 'x', b=True)]") == '[f(a="x", b=true)]'


def test_bad_call_string_raises():
    with pytest.raises(toolforge.CallSyntaxError):
        toolforge.parse_calls("[f(a=)]")


def test_validate_api_round_trip():
    first = json.loads((FIXTURES / "tools" / "reference_tools.jsonl").read_text().splitlines()[0])
    assert toolforge.validate_api(first)["name"] == first["name"]
    with pytest.raises(toolforge.SchemaError):
        toolforge.validate_api({"name": "x"})


def test_rule_layer_on_fixtures():
    for line in (FIXTURES / "dlv" / "clean.jsonl").read_text().splitlines():
        assert toolforge.check_record(line) == []
    for line in (FIXTURES / "dlv" / "faults.jsonl").read_text().splitlines():
        case = json.loads(line)
        assert {v["rule_id"] for v in toolforge.check_record(case["record"])} == {case["expect"]}
    assert len(toolforge.rule_ids()) == 19


def test_loss():
    assert toolforge.loss_from_logprobs([math.log(0.5)] * 7) == pytest.approx(math.log(2), abs=1e-12)
    assert toolforge.loss_from_logprobs([-1.0, -2.0, -3.0]) == pytest.approx(2.0)
