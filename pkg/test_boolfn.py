from fractions import Fraction

import numpy as np
import pytest

from models.boolfn import (
    builtin,
    conditional_mean,
    disagreement,
    from_table,
    is_decreasing,
    is_increasing,
    load_function,
    marginal_table,
    mean,
    restrict,
)
from models.space import PartialPoint, make_space, marginal_array, pbiased_space
from utils.errors import (
    AlphabetNotBinary,
    EnumerationCapExceeded,
    InvalidParameter,
    NonBooleanValue,
    TableLengthMismatch,
    UnknownBuiltin,
)


def flat(f):
    return f.values.reshape(-1).tolist()


def test_or_and_majority_tables():
    space = pbiased_space(3, "1/2")
    assert flat(builtin("or", space)) == [0, 1, 1, 1, 1, 1, 1, 1]
    assert flat(builtin("and", space)) == [0, 0, 0, 0, 0, 0, 0, 1]
    assert flat(builtin("majority", space)) == [0, 0, 0, 1, 0, 1, 1, 1]
    assert flat(builtin("parity", space)) == [0, 1, 1, 0, 1, 0, 0, 1]


def test_dictator_and_tribes():
    space = pbiased_space(4, "1/2")
    d = builtin("dictator", space, i=1)
    assert d.evaluate(PartialPoint.full([0, 1, 0, 0])) == 1
    assert d.evaluate(PartialPoint.full([1, 0, 1, 1])) == 0
    t = builtin("tribes", space, w=2)
    assert t.evaluate(PartialPoint.full([1, 1, 0, 0])) == 1
    assert t.evaluate(PartialPoint.full([1, 0, 1, 0])) == 0
    assert t.evaluate(PartialPoint.full([0, 0, 1, 1])) == 1


def test_threshold_default():
    f = builtin("threshold", pbiased_space(4, "1/2"), t=2)
    assert f.evaluate(PartialPoint.full([1, 0, 0, 1])) == 1
    assert f.evaluate(PartialPoint.full([0, 0, 0, 1])) == 0


def test_unknown_builtin_and_ternary_alphabet():
    with pytest.raises(UnknownBuiltin):
        builtin("nope", pbiased_space(2, "1/2"))
    with pytest.raises(AlphabetNotBinary):
        builtin("or", make_space([["1/3", "1/3", "1/3"]] * 2))


def test_table_validation():
    space = pbiased_space(2, "1/2")
    with pytest.raises(TableLengthMismatch):
        from_table(space, [0, 1, 1])
    with pytest.raises(NonBooleanValue):
        from_table(space, [0, 1, 2, 1])
    real = from_table(space, ["1/2", 0, 1, "-1/3"], boolean=False)
    assert real.values[1, 1] == Fraction(-1, 3)


def test_load_function_forms():
    f = load_function({"table": "0110"})
    assert f.n == 2 and flat(f) == [0, 1, 1, 0]
    g = load_function({"builtin": "or", "n": 3, "p": "1/3"})
    assert g.space.bias == Fraction(1, 3)
    h = load_function({
        "space": {"n": 2, "space": {"kind": "p-biased", "p": 0.25}},
        "function": {"kind": "builtin", "name": "and", "params": {}},
    })
    assert mean(h) == Fraction(1, 16)


@pytest.mark.parametrize("doc", [
    {"builtin": "or", "n": "x"},
    {"builtin": "or", "n": 2, "params": ["w", 2]},
    {"table": "01t1"},
    {"table": ["1/2", 0, "three", 1], "range": "real"},
    {"table": 7},
    {"space": {"n": 2, "space": {"kind": "p-biased", "p": "1/2"}}, "function": "or"},
    {"space": {"n": 2, "space": {"kind": "p-biased", "p": "1/2"}}, "function": {"kind": "circuit"}},
    {"function": {"kind": "builtin", "name": "or"}},
    {"space": {"n": 2, "space": {"kind": "p-biased"}}, "function": {"kind": "builtin", "name": "or"}},
    {"formula": "x0 or x1"},
])
def test_malformed_function_docs(doc):
    with pytest.raises(InvalidParameter):
        load_function(doc)


def test_lazy_builtin_keeps_symmetric_paths():
    f = builtin("or", pbiased_space(3, "1/2"), cap=4)
    assert f.is_lazy
    with pytest.raises(EnumerationCapExceeded):
        f.values
    assert mean(f) == Fraction(7, 8)
    assert f.evaluate(PartialPoint.full([0, 0, 1])) == 1


def test_mean_of_or_at_one_third():
    assert mean(builtin("or", pbiased_space(3, "1/3"))) == 1 - Fraction(2, 3) ** 3


def test_conditional_mean_of_majority():
    f = builtin("majority", pbiased_space(3, "1/2"))
    assert conditional_mean(f, 0b001, PartialPoint.from_dict({0: 1})) == Fraction(3, 4)
    assert conditional_mean(f, 0b011, PartialPoint.from_dict({0: 1, 1: 1})) == 1


def test_conditional_mean_at_a_full_point():
    space = pbiased_space(2, "1/3")
    f = from_table(space, [0, 1, 1, 0])
    assert conditional_mean(f, 0b11, PartialPoint.full([1, 0])) == 1
    assert conditional_mean(f, 0b11, PartialPoint.full([1, 1])) == 0
    g = builtin("and", pbiased_space(3, "1/3"))
    assert conditional_mean(g, 0b111, PartialPoint.full([1, 1, 1])) == 1
    assert conditional_mean(g, 0b111, PartialPoint.full([1, 0, 1])) == 0


def test_restrict_empty_is_identity():
    f = builtin("majority", pbiased_space(3, "1/2"))
    assert restrict(f, 0, PartialPoint()) is f


def test_restrictions_compose():
    rng = np.random.default_rng(3)
    space = pbiased_space(4, "1/3")
    f = from_table(space, rng.integers(0, 2, size=16).tolist())
    step = restrict(restrict(f, 0b0001, PartialPoint.from_dict({0: 1})), 0b0010, PartialPoint.from_dict({1: 0}))
    once = restrict(f, 0b0101, PartialPoint.from_dict({0: 1, 2: 0}))
    assert flat(step) == flat(once)


def test_monotonicity():
    space = pbiased_space(4, "1/2")
    assert is_increasing(builtin("or", space))
    assert is_increasing(builtin("tribes", space, w=2))
    assert not is_increasing(builtin("parity", space))
    assert is_decreasing(builtin("const1", space))
    assert is_decreasing(from_table(space, [1 - v for v in flat(builtin("and", space))]))


def test_restriction_of_increasing_is_increasing():
    f = builtin("majority", pbiased_space(4, "1/2"))
    for mask in range(16):
        coords = [i for i in range(4) if mask >> i & 1]
        for values in np.ndindex(*(2,) * len(coords)):
            y = PartialPoint.from_dict(dict(zip(coords, map(int, values))))
            assert is_increasing(restrict(f, mask, y))


def test_symmetric_marginal_matches_enumeration():
    space = pbiased_space(4, "1/3")
    f = builtin("majority", space)
    plain = from_table(space, flat(f))
    assert not plain.symmetric
    for mask in (0, 0b0001, 0b0101, 0b1110):
        weights = [space.weight_array(i) for i in range(4)]
        expected = marginal_array(plain.as_array(), weights, mask)
        assert np.asarray(marginal_table(f, mask)).tolist() == np.asarray(expected).tolist()


def test_disagreement():
    space = pbiased_space(2, "1/4")
    f = from_table(space, [0, 1, 1, 1])
    g = from_table(space, [0, 1, 1, 0])
    assert disagreement(f, g) == Fraction(1, 16)
