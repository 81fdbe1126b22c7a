from fractions import Fraction

import numpy as np
import pytest

from analysis.random_instances import random_boolean
from models.boolfn import builtin, from_table, mean
from models.space import make_space, pbiased_space
from models.walsh import (
    expand_array,
    high_frequency_weight,
    infinity_bound_holds,
    inner_product,
    marginal_identity_holds,
    mean_zero_residual,
    parseval_report,
    pbiased_coefficients,
    total_influence_from_norms,
    walsh_expand,
)
from utils.errors import AlphabetNotBinary

BIASES = ["1/4", "1/3", "1/2"]


def test_dictator_components():
    e = walsh_expand(builtin("dictator", pbiased_space(3, "1/2"), i=0))
    assert e.component(0)[()] == Fraction(1, 2)
    assert e.component(0b001).tolist() == [Fraction(-1, 2), Fraction(1, 2)]
    assert e.l2sq(0b001) == Fraction(1, 4)
    assert all(e.l2sq(m) == 0 for m in range(2, 8))


def test_empty_set_component_norms():
    e = walsh_expand(builtin("dictator", pbiased_space(3, "1/2"), i=0))
    assert e.component(0).ndim == 0
    assert e.l2sq(0) == Fraction(1, 4)
    assert e.linf(0) == Fraction(1, 2)
    assert e.marginal(0)[()] == Fraction(1, 2)
    assert inner_product(e, 0, 0b001) == 0
    assert marginal_identity_holds(e, 0)


@pytest.mark.parametrize("p", BIASES)
@pytest.mark.parametrize("seed", range(10))
def test_walsh_identities_on_random_tables(p, seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 4
    f = random_boolean(pbiased_space(n, p), rng)
    e = walsh_expand(f)
    report = parseval_report(e)
    assert report.residual == 0 and report.ok
    assert mean_zero_residual(e) == 0
    assert infinity_bound_holds(e)
    assert marginal_identity_holds(e)


@pytest.mark.parametrize("seed", range(5))
def test_orthogonality_and_uniqueness(seed):
    rng = np.random.default_rng(100 + seed)
    f = random_boolean(pbiased_space(3, BIASES[seed % 3]), rng)
    e = walsh_expand(f)
    masks = e.masks
    for i, a in enumerate(masks):
        for b in masks[i + 1:]:
            assert inner_product(e, a, b) == 0
    again = expand_array(f.space, e.reconstruct().as_array())
    for mask in masks:
        assert again.component(mask).tolist() == e.component(mask).tolist()


def test_non_binary_space_expansion():
    space = make_space([["1/2", "1/3", "1/6"], ["1/4", "3/4"]])
    f = from_table(space, [0, 1, 1, 0, 1, 1])
    e = walsh_expand(f)
    assert parseval_report(e).residual == 0
    assert mean_zero_residual(e) == 0
    assert e.component(0b11).shape == (3, 2)


def test_pbiased_coefficients_of_dictator():
    p = Fraction(1, 3)
    basis = pbiased_coefficients(builtin("dictator", pbiased_space(2, p), i=0))
    assert basis.squared_coefficients[0] == p ** 2
    assert basis.squared_coefficients[0b01] == p * (1 - p)
    assert basis.squared_coefficients[0b10] == 0
    assert basis.coefficients[0b01] == pytest.approx(float(p * (1 - p)) ** 0.5)


def test_pbiased_coefficients_rebuild_components():
    space = pbiased_space(2, "1/3")
    f = builtin("parity", space)
    e = walsh_expand(f)
    basis = pbiased_coefficients(f)
    for mask in e.masks:
        comp = e.component(mask)
        for values in np.ndindex(*comp.shape):
            expected = basis.coefficients[mask]
            for v in values:
                expected *= basis.r(v)
            assert float(comp[values]) == pytest.approx(expected)
    assert sum(basis.squared_coefficients.values()) == sum(e.l2sq(m) for m in e.masks)


def test_pbiased_coefficients_need_binary():
    space = make_space([["1/3", "1/3", "1/3"]])
    with pytest.raises(AlphabetNotBinary):
        pbiased_coefficients(from_table(space, [0, 1, 1]))


def test_high_frequency_tail_bound():
    rng = np.random.default_rng(5)
    for _ in range(20):
        e = walsh_expand(random_boolean(pbiased_space(4, "1/3"), rng))
        total = total_influence_from_norms(e)
        for k in range(1, 5):
            assert high_frequency_weight(e, k) <= total / k


def test_float_mode_parseval():
    space = pbiased_space(5, 0.3, "float")
    e = walsh_expand(builtin("majority", space))
    assert parseval_report(e).ok
    assert e.marginal(0b00011).shape == (2, 2)
    assert float(np.asarray(e.marginal(0))) == pytest.approx(float(mean(e.base)))
