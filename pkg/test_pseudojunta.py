from fractions import Fraction

import numpy as np
import pytest

from analysis.random_instances import dominating_collection, random_collection, random_measurable
from models.boolfn import builtin, l2_distance_sq, mean
from models.pseudojunta import (
    atoms,
    check_prop_direct,
    conditional_expectation,
    cost,
    cost_mc,
    dominates,
    empty_collection,
    entry_mass,
    is_measurable,
    junta_collection,
    junta_distance,
    junta_map,
    load_collection,
    make_collection,
    or_example_collection,
    restrict_collection,
    round_half,
)
from models.space import PartialPoint, pbiased_space
from utils.errors import (
    InvalidParameter,
    NonBooleanValue,
    NotMeasurable,
    SupportMismatch,
    TableLengthMismatch,
)


def test_plain_junta_collection():
    space = pbiased_space(3, "1/3")
    J = junta_collection(space, [0, 1])
    assert cost(J) == 2
    partition = atoms(J)
    assert len(partition.atoms) == 4
    assert [a.point.values for a in partition.atoms] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert partition.total_mass == 1


def test_empty_collection_has_one_atom():
    space = pbiased_space(3, "1/4")
    f = builtin("majority", space)
    J = empty_collection(space)
    assert cost(J) == 0
    assert len(atoms(J).atoms) == 1
    ce = conditional_expectation(f, J)
    assert set(ce.values.reshape(-1).tolist()) == {mean(f)}


@pytest.mark.parametrize("n", [4, 5, 6, 8])
def test_or_example_collection(n):
    space = pbiased_space(n, Fraction(1, n))
    J = or_example_collection(space)
    assert cost(J) == 1
    assert len(atoms(J).atoms) == 2 ** n
    assert is_measurable(builtin("or", space), J)


def test_junta_map_reveals_the_ones():
    J = or_example_collection(pbiased_space(3, "1/2"))
    assert junta_map(J, PartialPoint.full([1, 0, 1])) == 0b101
    assert junta_map(J, PartialPoint.full([0, 0, 0])) == 0
    with pytest.raises(SupportMismatch):
        junta_map(J, PartialPoint.from_dict({0: 1}))


def test_conditional_expectation_of_majority():
    space = pbiased_space(3, "1/2")
    f = builtin("majority", space)
    J = junta_collection(space, [0, 1])
    ce = conditional_expectation(f, J)
    table = ce.as_array()
    assert table[0, 0, 0] == 0 and table[0, 0, 1] == 0
    assert table[0, 1, 0] == Fraction(1, 2) and table[1, 0, 1] == Fraction(1, 2)
    assert table[1, 1, 0] == 1
    h = round_half(ce)
    assert h.values[0, 1, 1] == 0 and h.values[1, 1, 0] == 1
    assert is_measurable(h, J)
    assert not is_measurable(f, J)


@pytest.mark.parametrize("seed", range(8))
def test_tower_and_contraction(seed):
    rng = np.random.default_rng(seed)
    space = pbiased_space(4, ("1/4", "1/3", "1/2")[seed % 3])
    f = builtin("tribes", space, w=2)
    J = random_collection(space, rng)
    ce = conditional_expectation(f, J)
    assert mean(ce) == mean(f)
    assert l2_distance_sq(ce, builtin("const0", space)) <= mean(f)


@pytest.mark.parametrize("seed", range(8))
def test_prop_direct_on_random_measurable(seed):
    rng = np.random.default_rng(20 + seed)
    space = pbiased_space(3, ("1/4", "1/3", "1/2")[seed % 3])
    J = random_collection(space, rng)
    h = random_measurable(J, rng)
    report = check_prop_direct(J, h)
    assert report.passed
    assert report.twice_cost == 2 * cost(J)
    assert is_measurable(h, dominating_collection(J, rng))


def test_prop_direct_needs_measurability():
    space = pbiased_space(3, "1/2")
    with pytest.raises(NotMeasurable):
        check_prop_direct(junta_collection(space, [0]), builtin("majority", space))


def test_make_collection_validation():
    space = pbiased_space(3, "1/2")
    with pytest.raises(NonBooleanValue):
        make_collection(space, {0b001: [0, 2]})
    with pytest.raises(TableLengthMismatch):
        make_collection(space, {0b011: [0, 1]})
    with pytest.raises(SupportMismatch):
        make_collection(space, {0b1000: [0, 1]})
    with pytest.raises(InvalidParameter):
        make_collection(space, {0b011: [0, 0, 0, 1]}, max_arity=1)
    assert make_collection(space, {0b001: [0, 0]}).entries == {}


def test_load_collection_forms():
    space = pbiased_space(3, "1/2")
    J = load_collection({"entries": [
        {"S": [0], "J": {"kind": "all-ones-indicator"}},
        {"S": [1, 2], "J": {"kind": "table", "values": "0001"}},
        {"S": [2], "J": {"kind": "const0"}},
    ]}, space)
    assert J.masks == [0b001, 0b110]
    assert entry_mass(J, 0b110) == Fraction(1, 4)
    assert cost(load_collection({"builtin": "junta", "A": [2]}, space)) == 1
    assert cost(load_collection({"builtin": "or-example", "max_size": 1}, space)) == Fraction(3, 2)
    with pytest.raises(InvalidParameter):
        load_collection({"builtin": "nope"}, space)


@pytest.mark.parametrize("doc", [
    {"entries": ["S"]},
    {"entries": [{"S": ["a"], "J": {"kind": "const1"}}]},
    {"entries": [{"S": [0], "J": "const1"}]},
    {"entries": [{"S": [0], "J": {"kind": "table", "values": "0x"}}]},
    {"builtin": "or-example", "max_size": "two"},
])
def test_malformed_collection_docs(doc):
    with pytest.raises(InvalidParameter):
        load_collection(doc, pbiased_space(3, "1/2"))


def test_dominates_and_restriction():
    space = pbiased_space(3, "1/2")
    small = or_example_collection(space, 1)
    big = or_example_collection(space, 2)
    assert dominates(big, small)
    assert not dominates(small, big)
    assert restrict_collection(big, 0b011).masks == [0b001, 0b010, 0b011]


def test_cost_monte_carlo():
    J = or_example_collection(pbiased_space(6, "1/2"))
    est, se = cost_mc(J, seed=5, samples=20_000)
    assert est == pytest.approx(3.0, abs=0.06)
    assert 0 < se < 0.02
    assert cost_mc(J, seed=5, samples=20_000) == (est, se)


def test_or_has_no_close_two_junta():
    f = builtin("or", pbiased_space(16, Fraction(1, 16)))
    distance = junta_distance(f, [0, 1])
    assert distance == Fraction(15, 16) ** 16
    assert float(distance) == pytest.approx(0.356, abs=1e-3)
