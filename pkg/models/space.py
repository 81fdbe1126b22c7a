"""
Finite product probability spaces X^n = X_0 x ... x X_{n-1}.

Points are stored as symbol indices. Every table over X^S is a numpy array whose
axes are the coordinates of S in increasing order, so C-order flattening is the
enumeration order: lexicographic in coordinate index, then symbol index.

Two arithmetic modes share one code path: exact mode stores weights as
fractions.Fraction in object arrays, float mode as float64 arrays.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import ENUM_CAP, FLOAT_WEIGHT_TOL
from utils.errors import (
    EmptySpace,
    EnumerationCapExceeded,
    InvalidParameter,
    NonPositiveWeight,
    SupportMismatch,
    SymbolOutOfRange,
    WeightsNotNormalized,
    malformed,
)
from utils.logger import logger
from utils.math_utils import indices_from_mask, mask_from_indices, to_scalar


@dataclass(frozen=True)
class ProductSpace:
    """
    n finite coordinate distributions. weights[i][a] is the probability of symbol a
    at coordinate i. Use make_space / pbiased_space to build a validated space; the
    bare constructor is used internally for restrictions (which may have n = 0).
    """
    weights: Tuple[Tuple[Any, ...], ...]
    exact: bool = True

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(w) for w in self.weights)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def dtype(self):
        return object if self.exact else np.float64

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    @property
    def outcome_count(self) -> int:
        return math.prod(self.sizes)

    @property
    def is_binary(self) -> bool:
        return all(m == 2 for m in self.sizes)

    @cached_property
    def bias(self):
        """p if this is a homogeneous p-biased cube, else None."""
        if not self.n or not self.is_binary:
            return None
        first = self.weights[0]
        if all(w == first for w in self.weights):
            return first[1]
        return None

    def scalar(self, value):
        return to_scalar(value, self.exact)

    def asarray(self, values) -> np.ndarray:
        return np.asarray(values).astype(self.dtype)

    def weight_array(self, i: int) -> np.ndarray:
        return np.array(self.weights[i], dtype=self.dtype)

    def sizes_of(self, mask: int) -> Tuple[int, ...]:
        return tuple(self.sizes[i] for i in indices_from_mask(mask))

    def count_of(self, mask: int) -> int:
        count = 1
        for m in self.sizes_of(mask):
            count *= m
        return count

    def subspace(self, mask: int) -> "ProductSpace":
        """The space X^S, coordinates renumbered 0..|S|-1 in increasing order."""
        return ProductSpace(tuple(self.weights[i] for i in indices_from_mask(mask)), self.exact)

    def with_mode(self, exact: bool) -> "ProductSpace":
        if exact == self.exact:
            return self
        conv = [tuple(to_scalar(w, exact) for w in ws) for ws in self.weights]
        return ProductSpace(tuple(conv), exact)

    def to_doc(self) -> Dict[str, Any]:
        def enc(w):
            return str(w) if self.exact else float(w)
        if self.bias is not None:
            return {"n": self.n, "space": {"kind": "p-biased", "p": enc(self.bias)}}
        return {"n": self.n, "space": {"kind": "finite",
                                       "coords": [[enc(w) for w in ws] for ws in self.weights]}}


@dataclass(frozen=True)
class PartialPoint:
    """
    An assignment of symbols to the coordinates in support (a bitmask).
    values[k] is the symbol of the k-th smallest coordinate in support.
    A Point is a PartialPoint whose support is the whole index set.
    """
    support: int = 0
    values: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.values) != len(indices_from_mask(self.support)):
            raise SupportMismatch(
                f"{len(self.values)} values for support of size {len(indices_from_mask(self.support))}"
            )

    @classmethod
    def from_dict(cls, assignment: Dict[int, int]) -> "PartialPoint":
        items = sorted((int(i), int(v)) for i, v in assignment.items())
        return cls(mask_from_indices(i for i, _ in items), tuple(v for _, v in items))

    @classmethod
    def full(cls, values: Sequence[int]) -> "PartialPoint":
        return cls((1 << len(values)) - 1, tuple(int(v) for v in values))

    @property
    def coords(self) -> Tuple[int, ...]:
        return indices_from_mask(self.support)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.coords, self.values))

    def compose(self, other: "PartialPoint") -> "PartialPoint":
        """(x, y): defined iff the supports are disjoint."""
        if self.support & other.support:
            raise SupportMismatch("Cannot compose partial points with overlapping supports")
        merged = self.as_dict()
        merged.update(other.as_dict())
        return PartialPoint.from_dict(merged)

    def restrict(self, mask: int) -> "PartialPoint":
        """x_T for T a subset of the support."""
        if mask & ~self.support:
            raise SupportMismatch("Restriction target is not contained in the support")
        d = self.as_dict()
        return PartialPoint.from_dict({i: d[i] for i in indices_from_mask(mask)})


def _validate_weights(coords: List[List[Any]], exact: bool) -> Tuple[Tuple[Any, ...], ...]:
    if not coords:
        raise EmptySpace("A product space needs at least one coordinate")
    out = []
    for i, ws in enumerate(coords):
        if len(ws) < 2:
            raise EmptySpace(f"Coordinate {i} has alphabet size {len(ws)}; at least 2 symbols required")
        vals = tuple(to_scalar(w, exact) for w in ws)
        if any(w <= 0 for w in vals):
            raise NonPositiveWeight(f"Coordinate {i} has a non-positive weight: {list(map(str, vals))}")
        total = sum(vals)
        if exact and total != 1:
            raise WeightsNotNormalized(f"Coordinate {i} weights sum to {total}, not 1")
        if not exact and abs(total - 1.0) > FLOAT_WEIGHT_TOL:
            raise WeightsNotNormalized(f"Coordinate {i} weights sum to {total!r}, not 1")
        out.append(vals)
    return tuple(out)


def _coords_from_doc(spec: Dict[str, Any]) -> List[List[Any]]:
    with malformed("space spec"):
        n = int(spec["n"])
        inner = spec["space"]
        kind = inner["kind"]
        if n < 1:
            raise EmptySpace(f"Space spec has n={n}")
        if kind == "p-biased":
            p = to_scalar(inner["p"], exact=True)
            return [[1 - p, p] for _ in range(n)]
        if kind == "finite":
            coords = inner["coords"]
            if len(coords) == 1 and n > 1:
                coords = coords * n
            if len(coords) != n:
                raise InvalidParameter(f"Space spec lists {len(coords)} coordinates for n={n}")
            return [list(c) for c in coords]
    raise InvalidParameter(f"Unknown space kind {kind!r}")


def make_space(spec, arith: Optional[str] = None) -> ProductSpace:
    """
    Build a validated ProductSpace from either a JSON space spec
    ({"n": .., "space": {...}}) or a plain list of per-coordinate weight lists.
    arith is "exact", "float" or None (exact when the outcome count is within
    the enumeration cap, float otherwise).
    """
    if isinstance(spec, dict):
        coords = _coords_from_doc(spec)
    else:
        with malformed("space spec"):
            coords = [list(c) for c in spec]
    if not coords:
        raise EmptySpace("A product space needs at least one coordinate")
    count = 1
    for c in coords:
        count *= len(c)
    if arith is None:
        exact = count <= ENUM_CAP
    elif arith in ("exact", "float"):
        exact = arith == "exact"
    else:
        raise InvalidParameter(f"Unknown arithmetic mode {arith!r}")
    space = ProductSpace(_validate_weights(coords, exact), exact)
    logger.info(f"Built space with n={space.n}, {count} outcomes ({'exact' if exact else 'float'} arithmetic)")
    return space


def pbiased_space(n: int, p, arith: Optional[str] = None) -> ProductSpace:
    p = to_scalar(p, exact=True)
    return make_space([[1 - p, p] for _ in range(n)], arith)


def check_point(space: ProductSpace, y: PartialPoint) -> None:
    if y.support & ~space.full_mask:
        raise SupportMismatch(f"Support {y.coords} exceeds n={space.n}")
    for i, v in zip(y.coords, y.values):
        if not 0 <= v < space.sizes[i]:
            raise SymbolOutOfRange(f"Symbol {v} at coordinate {i} outside [0, {space.sizes[i]})")


def measure(space: ProductSpace, y: PartialPoint):
    """mu(y) = prod_{i in S} weight_i(y_i); the empty point has measure 1."""
    check_point(space, y)
    result = space.one
    for i, v in zip(y.coords, y.values):
        result = result * space.weights[i][v]
    return result


def check_cap(space: ProductSpace, mask: int, cap: Optional[int] = None) -> None:
    cap = ENUM_CAP if cap is None else cap
    count = space.count_of(mask)
    if count > cap:
        raise EnumerationCapExceeded(
            f"Enumerating {count} outcomes exceeds the cap of {cap}; use a sampling path"
        )


def enumerate_points(space: ProductSpace, mask: Optional[int] = None,
                     cap: Optional[int] = None) -> Iterator[Tuple[PartialPoint, Any]]:
    """
    Every point of X^S exactly once with its measure, in lexicographic order
    (coordinate index, then symbol index).
    """
    mask = space.full_mask if mask is None else mask
    check_cap(space, mask, cap)
    coords = indices_from_mask(mask)
    for values in product(*(range(space.sizes[i]) for i in coords)):
        w = space.one
        for i, v in zip(coords, values):
            w = w * space.weights[i][v]
        yield PartialPoint(mask, tuple(values)), w


def weight_grid(space: ProductSpace, mask: Optional[int] = None) -> np.ndarray:
    """The product measure on X^S as an array with one axis per coordinate of S."""
    mask = space.full_mask if mask is None else mask
    grid = np.array(space.one, dtype=space.dtype)
    for i in indices_from_mask(mask):
        grid = np.multiply.outer(grid, space.weight_array(i))
    return np.asarray(grid, dtype=space.dtype)


def all_points(space: ProductSpace, mask: Optional[int] = None) -> np.ndarray:
    """All points of X^S as rows of symbol indices, in enumeration order."""
    mask = space.full_mask if mask is None else mask
    sizes = space.sizes_of(mask)
    if not sizes:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices(sizes, dtype=np.int64).reshape(len(sizes), -1).T


def sample(space: ProductSpace, seed: int, count: int) -> np.ndarray:
    """
    count i.i.d. points drawn from the product measure, as a (count, n) array of
    symbol indices. Deterministic given seed.
    """
    if count < 1:
        raise InvalidParameter(f"Sample count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    out = np.empty((count, space.n), dtype=np.int64)
    for i in range(space.n):
        probs = np.array([float(w) for w in space.weights[i]])
        out[:, i] = rng.choice(space.sizes[i], size=count, p=probs / probs.sum())
    return out


def sample_points(space: ProductSpace, seed: int, count: int) -> List[PartialPoint]:
    return [PartialPoint.full(row) for row in sample(space, seed, count)]


def integrate_axis(arr: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    """Integrate one axis of a table against the probability vector w."""
    moved = np.moveaxis(arr, axis, -1)
    return np.asarray((moved * w).sum(axis=-1), dtype=arr.dtype)


def marginal_array(arr: np.ndarray, weights: Sequence[np.ndarray], keep: int) -> np.ndarray:
    """Integrate out every local axis not in keep; the result has one axis per kept coordinate."""
    for axis in reversed(range(arr.ndim)):
        if not keep >> axis & 1:
            arr = integrate_axis(arr, weights[axis], axis)
    return arr
