import json
import math
import sys
from fractions import Fraction

import pytest

from models.schedule import parse_overrides, schedule
from utils.errors import InvalidParameter, ScheduleInfeasible


def test_default_pbiased_schedule_is_unrunnable():
    s = schedule(1, "1/10")
    assert s.fields["eps0"].value == Fraction(1, 10_000)
    assert s.k == 10_000
    assert s.fields["delta"].log2 == pytest.approx(-1e10)
    assert s.fields["eps1"].log2 == pytest.approx(-1e9 * math.log2(3) + 1e5 * math.log2(1e-4))
    assert not s.feasible
    assert "delta" in s.infeasible_fields
    with pytest.raises(ScheduleInfeasible):
        s.require_feasible()
    with pytest.raises(ScheduleInfeasible):
        s.exact("delta")


def test_general_schedule_fields():
    s = schedule(2, "1/2", mode="general", overrides=["k=2", "eps1=1/4"])
    assert list(s.fields) == ["C", "eps0", "k", "eps1", "delta0", "delta", "eps2"]
    assert s.exact("delta0") == Fraction(1, 16)
    assert s.fields["delta"].log2 == pytest.approx(-4020)
    assert s.fields["eps2"].log2 == pytest.approx(-4020 * 20)
    assert s.exact("delta") == Fraction(1, 2 ** 4020)
    s.require_feasible()


def test_overrides_replace_single_fields():
    s = schedule(1, "1/10", overrides={"k": "1", "eps1": "1/10", "delta": "1/100"})
    assert s.overridden
    assert s.k == 1
    assert s.exact("delta") == Fraction(1, 100)
    assert s.fields["delta"].overridden and not s.fields["eps0"].overridden
    assert s.scalar("eps1", exact=False) == pytest.approx(0.1)
    doc = s.to_doc()
    assert doc["overridden"] is True
    assert doc["fields"]["delta"]["value"] == "1/100"


def test_derived_constants_follow_overrides():
    s = schedule(1, "1/2", overrides=["k=1"])
    assert s.exact("delta") == Fraction(1, 2 ** 100)
    assert s.exact("eps1") == Fraction(1, 3 ** 10) * Fraction(1, 2000) ** 10


def test_budget_limits_materialization():
    s = schedule(1, "1/2", overrides=["k=1"], budget=10)
    assert s.fields["delta"].value is None
    assert s.fields["C"].value == 1
    with pytest.raises(ScheduleInfeasible):
        s.require_feasible()


@pytest.mark.parametrize("items", [["k2"], ["zeta=1"]])
def test_bad_override_syntax(items):
    with pytest.raises(InvalidParameter):
        parse_overrides(items)


@pytest.mark.parametrize("overrides", [["k=3/2"], ["delta=-1"], ["eps1=0"]])
def test_bad_override_values(overrides):
    with pytest.raises(InvalidParameter):
        schedule(1, "1/2", overrides=overrides)


@pytest.mark.parametrize("epsilon", ["0", "2", "-1/2"])
def test_epsilon_range(epsilon):
    with pytest.raises(InvalidParameter):
        schedule(1, epsilon)


def test_unknown_mode():
    with pytest.raises(InvalidParameter):
        schedule(1, "1/2", mode="uniform")


def test_general_schedule_document_with_huge_fields(monkeypatch):
    monkeypatch.setattr(sys, "get_int_max_str_digits", lambda: 4300, raising=False)
    s = schedule(2, "1/2", mode="general", overrides=["k=2", "eps1=1/4"])
    doc = s.to_doc()
    json.dumps(doc)
    delta, eps2 = doc["fields"]["delta"], doc["fields"]["eps2"]
    assert delta["value"] == f"1/{2 ** 4020}"
    assert "denominator_bits" not in delta
    assert eps2["value"] is None
    assert eps2["materialized"] is True
    assert eps2["numerator_bits"] == 1
    assert eps2["denominator_bits"] == 80401
    assert s.exact("eps2") == Fraction(1, 2 ** 80400)
