from fractions import Fraction

import numpy as np
import pytest

from models.space import (
    PartialPoint,
    all_points,
    enumerate_points,
    make_space,
    measure,
    pbiased_space,
    sample,
    weight_grid,
)
from utils.errors import (
    EmptySpace,
    EnumerationCapExceeded,
    InvalidParameter,
    NonPositiveWeight,
    SupportMismatch,
    SymbolOutOfRange,
    WeightsNotNormalized,
)


def test_uniform_cube_has_eight_equal_outcomes():
    space = make_space({"n": 3, "space": {"kind": "p-biased", "p": "1/2"}})
    assert space.outcome_count == 8
    assert all(w == Fraction(1, 8) for _, w in enumerate_points(space))


def test_measure_of_all_ones_point():
    space = pbiased_space(4, "1/4")
    assert measure(space, PartialPoint.full([1, 1, 1, 1])) == Fraction(1, 256)


def test_ternary_measures_sum_to_one():
    space = make_space([["1/2", "1/3", "1/6"]] * 2)
    points = list(enumerate_points(space))
    assert len(points) == 9
    assert sum(w for _, w in points) == 1


def test_measure_examples_at_p_three_tenths():
    space = pbiased_space(3, 0.3)
    assert space.weights[0] == (Fraction(7, 10), Fraction(3, 10))
    assert measure(space, PartialPoint.from_dict({1: 1})) == Fraction(3, 10)
    assert measure(space, PartialPoint.full([1, 0, 1])) == Fraction(63, 1000)
    assert measure(space, PartialPoint()) == 1


@pytest.mark.parametrize("mask", [0, 0b001, 0b101, 0b111])
def test_marginal_measures_sum_to_one(mask):
    space = make_space([["1/2", "1/2"], ["1/3", "1/3", "1/3"], ["1/5", "4/5"]])
    assert sum(w for _, w in enumerate_points(space, mask)) == 1


def test_measure_is_multiplicative_over_disjoint_supports():
    space = pbiased_space(4, "1/3")
    x = PartialPoint.from_dict({0: 1, 2: 0})
    y = PartialPoint.from_dict({1: 1, 3: 1})
    assert measure(space, x.compose(y)) == measure(space, x) * measure(space, y)


def test_compose_rejects_overlap():
    with pytest.raises(SupportMismatch):
        PartialPoint.from_dict({0: 1}).compose(PartialPoint.from_dict({0: 0, 1: 1}))


def test_enumeration_order_is_lexicographic():
    space = pbiased_space(2, "1/2")
    assert [p.values for p, _ in enumerate_points(space)] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all_points(space).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_weight_grid_matches_enumeration():
    space = make_space([["1/4", "3/4"], ["1/3", "1/3", "1/3"]])
    grid = weight_grid(space).reshape(-1).tolist()
    assert grid == [w for _, w in enumerate_points(space)]


@pytest.mark.parametrize("coords, error", [
    ([[0, 1]], NonPositiveWeight),
    ([["1/2", "1/3"]], WeightsNotNormalized),
    ([[1]], EmptySpace),
    ([], EmptySpace),
])
def test_invalid_spaces(coords, error):
    with pytest.raises(error):
        make_space(coords)


@pytest.mark.parametrize("spec", [
    {"n": 2, "space": {"kind": "p-biased"}},
    {"n": 2, "space": {"kind": "finite"}},
    {"n": "x", "space": {"kind": "p-biased", "p": "1/2"}},
    {"space": {"kind": "p-biased", "p": "1/2"}},
    {"n": 2, "space": "p-biased"},
    {"n": 2, "space": {"kind": "cauchy"}},
    [3, 4],
])
def test_malformed_space_specs(spec):
    with pytest.raises(InvalidParameter):
        make_space(spec)


def test_float_mode_tolerates_rounding():
    space = make_space([[0.1, 0.9], [1 / 3, 2 / 3]], "float")
    assert not space.exact
    assert sum(w for _, w in enumerate_points(space)) == pytest.approx(1.0)


def test_symbol_out_of_range():
    with pytest.raises(SymbolOutOfRange):
        measure(pbiased_space(2, "1/2"), PartialPoint.from_dict({0: 2}))


def test_enumeration_cap():
    space = pbiased_space(5, "1/2")
    with pytest.raises(EnumerationCapExceeded):
        list(enumerate_points(space, cap=16))


def test_sampling_is_seeded():
    space = pbiased_space(6, "1/3")
    a = sample(space, 7, 500)
    assert np.array_equal(a, sample(space, 7, 500))
    assert not np.array_equal(a, sample(space, 8, 500))
    assert a.shape == (500, 6)
    assert 0.25 < a.mean() < 0.42
