"""
Generalized Walsh (Efron-Stein) expansion f = sum_S F_S on a finite product space.

Marginals M_T = int f dx_{[n]\\T} are computed top-down over the subset lattice,
each from its parent M_{T+i} by integrating one axis. Components then follow as
F_S = prod_{i in S} (I - E_i) M_S, which is the inclusion-exclusion sum over
T subset of S. Components are tables over X^S only.
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from config import FLOAT_TOL
from models.boolfn import FunctionRep, from_table, marginal_table, with_space
from models.space import (
    ProductSpace,
    check_cap,
    integrate_axis,
    marginal_array,
    pbiased_space,
    weight_grid,
)
from utils.errors import AlphabetNotBinary, InvalidParameter
from utils.logger import logger
from utils.math_utils import indices_from_mask, iter_submasks, popcount, table_max_abs, table_sum


def center_axis(arr: np.ndarray, w: np.ndarray, axis: int) -> np.ndarray:
    """(I - E_i) along one axis."""
    return arr - np.expand_dims(integrate_axis(arr, w, axis), axis)


def expand_to(arr: np.ndarray, mask: int, target: int, sizes: Sequence[int]) -> np.ndarray:
    """View a table over X^S as a broadcastable table over X^U (S subset of U)."""
    shape = [sizes[i] if mask >> i & 1 else 1 for i in indices_from_mask(target)]
    return np.asarray(arr).reshape(shape)


def walsh_components(table: np.ndarray, weights: Sequence[np.ndarray]) -> Dict[int, np.ndarray]:
    """
    All components of the table's expansion, keyed by local bitmask over its axes.
    weights[i] is the probability vector of axis i.
    """
    m = table.ndim
    full = (1 << m) - 1
    marginals: Dict[int, np.ndarray] = {full: table}
    for mask in range(full - 1, -1, -1):
        bit = 0
        while mask >> bit & 1:
            bit += 1
        parent = mask | (1 << bit)
        pos = popcount(parent & ((1 << bit) - 1))
        marginals[mask] = integrate_axis(marginals[parent], weights[bit], pos)

    components: Dict[int, np.ndarray] = {}
    for mask, arr in marginals.items():
        for pos, i in enumerate(indices_from_mask(mask)):
            arr = center_axis(arr, weights[i], pos)
        components[mask] = arr
    return components


@dataclass(frozen=True, eq=False)
class WalshExpansion:
    base: FunctionRep
    components: Dict[int, np.ndarray]
    norms: Dict[int, Tuple[Any, Any]]

    @property
    def space(self) -> ProductSpace:
        return self.base.space

    @property
    def masks(self):
        return sorted(self.components)

    def component(self, mask: int) -> np.ndarray:
        return self.components[mask]

    def l2sq(self, mask: int):
        return self.norms[mask][0]

    def linf(self, mask: int):
        return self.norms[mask][1]

    def embed(self, mask: int) -> np.ndarray:
        """F_S as a full table over X^n."""
        sizes = self.space.sizes
        arr = expand_to(self.components[mask], mask, self.space.full_mask, sizes)
        return np.broadcast_to(arr, sizes)

    def marginal(self, mask: int) -> np.ndarray:
        """sum_{S subset of T} F_S as a table over X^T."""
        sizes = self.space.sizes
        total = np.zeros(self.space.sizes_of(mask), dtype=self.space.dtype)
        for sub in iter_submasks(mask):
            total = total + expand_to(self.components[sub], sub, mask, sizes)
        return np.asarray(total, dtype=self.space.dtype)

    def reconstruct(self) -> FunctionRep:
        total = np.zeros(self.space.sizes, dtype=self.space.dtype)
        for mask in self.components:
            total = total + self.embed(mask)
        return from_table(self.space, total.reshape(-1).tolist(), boolean=False, name=f"sum F_S({self.base.name})")


def component_norms(space: ProductSpace, mask: int, arr: np.ndarray) -> Tuple[Any, Any]:
    l2sq = table_sum(weight_grid(space, mask) * arr * arr)
    linf = table_max_abs(arr, space.zero)
    return l2sq, linf


def walsh_expand(f: FunctionRep) -> WalshExpansion:
    space = f.space
    check_cap(space, space.full_mask)
    table = f.as_array()
    weights = [space.weight_array(i) for i in range(space.n)]
    components = walsh_components(table, weights)
    norms = {mask: component_norms(space, mask, arr) for mask, arr in components.items()}
    logger.info(f"Walsh expansion of {f.name}: {len(components)} components over n={space.n}")
    return WalshExpansion(f, components, norms)


def expand_array(space: ProductSpace, arr: np.ndarray, name: str = "table") -> WalshExpansion:
    """Expansion of a real table given directly as an array over X^n."""
    return walsh_expand(from_table(space, np.asarray(arr).reshape(-1).tolist(), boolean=False, name=name))


def marginal(f: FunctionRep, mask: int) -> np.ndarray:
    """int f dx_{[n]\\T} as a table over X^T."""
    return marginal_table(f, mask)


# --- p-biased basis ---

@dataclass(frozen=True)
class PBiasedBasis:
    """
    r(0) = -sqrt(p/(1-p)), r(1) = sqrt((1-p)/p); F_S(x) = coefficient(S) * prod r(x_i).
    Coefficients are floats (r is irrational); squared_coefficients are exact in exact mode.
    """
    p: Any
    r0: float
    r1: float
    coefficients: Dict[int, float]
    squared_coefficients: Dict[int, Any]

    def r(self, symbol: int) -> float:
        return self.r1 if symbol else self.r0


def pbiased_coefficients(f: FunctionRep, p=None) -> PBiasedBasis:
    """
    c(S) = int f prod_{i in S}(x_i - p) dx by a per-axis transform, then
    coefficient(S) = c(S) / (p(1-p))^{|S|/2}.
    """
    space = f.space
    if not space.is_binary:
        raise AlphabetNotBinary("p-biased coefficients need binary alphabets")
    if p is not None:
        space = pbiased_space(space.n, p, "exact" if space.exact else "float")
        f = with_space(f, space)
    p = space.bias
    if p is None:
        raise InvalidParameter("p-biased coefficients need a common bias on every coordinate")
    check_cap(space, space.full_mask)
    one = space.one
    q = one - p
    arr = f.as_array()
    for axis in range(space.n):
        a0 = np.take(arr, 0, axis=axis)
        a1 = np.take(arr, 1, axis=axis)
        arr = np.stack([q * a0 + p * a1, p * q * (a1 - a0)], axis=axis)

    var = p * q
    coefficients: Dict[int, float] = {}
    squared: Dict[int, Any] = {}
    for mask in range(1 << space.n):
        c = arr[tuple(mask >> i & 1 for i in range(space.n))] if space.n else arr[()]
        size = popcount(mask)
        squared[mask] = c * c / var ** size
        coefficients[mask] = float(c) / math.sqrt(float(var)) ** size
    r0 = -math.sqrt(float(p) / float(q))
    r1 = math.sqrt(float(q) / float(p))
    return PBiasedBasis(p, r0, r1, coefficients, squared)


# --- Identities ---

@dataclass(frozen=True)
class ParsevalReport:
    lhs: Any
    rhs: Any
    residual: Any
    exact: bool

    @property
    def ok(self) -> bool:
        return self.residual == 0 if self.exact else self.residual <= FLOAT_TOL


def parseval_report(e: WalshExpansion) -> ParsevalReport:
    space = e.space
    table = e.base.as_array()
    lhs = table_sum(weight_grid(space) * table * table)
    rhs = sum((e.l2sq(mask) for mask in e.components), space.zero)
    return ParsevalReport(lhs, rhs, abs(lhs - rhs), space.exact)


def inner_product(e: WalshExpansion, s1: int, s2: int):
    """int F_{S1} F_{S2} over X^n, computed on X^{S1 u S2}."""
    union = s1 | s2
    sizes = e.space.sizes
    a = expand_to(e.components[s1], s1, union, sizes)
    b = expand_to(e.components[s2], s2, union, sizes)
    return table_sum(weight_grid(e.space, union) * a * b)


def mean_zero_residual(e: WalshExpansion):
    """max over S and i in S of |int F_S dx_i|."""
    worst = e.space.zero
    for mask, arr in e.components.items():
        for pos, i in enumerate(indices_from_mask(mask)):
            worst = max(worst, table_max_abs(integrate_axis(arr, e.space.weight_array(i), pos), e.space.zero))
    return worst


def infinity_bound_holds(e: WalshExpansion) -> bool:
    """||F_S||_inf <= 2^{|S|} ||f||_inf for every S."""
    sup = table_max_abs(e.base.as_array())
    slack = 0 if e.space.exact else FLOAT_TOL
    return all(e.linf(mask) <= 2 ** popcount(mask) * sup + slack for mask in e.components)


def marginal_identity_holds(e: WalshExpansion, mask: Optional[int] = None) -> bool:
    """int f dx_{[n]\\T} equals sum_{S subset of T} F_S, for T = mask or every T."""
    space = e.space
    weights = [space.weight_array(i) for i in range(space.n)]
    table = e.base.as_array()
    masks = [mask] if mask is not None else list(e.components)
    for t in masks:
        worst = table_max_abs(marginal_array(table, weights, t) - e.marginal(t))
        if (worst != 0) if space.exact else (worst > FLOAT_TOL):
            return False
    return True


def total_influence_from_norms(e: WalshExpansion):
    """2 sum_S |S| ||F_S||_2^2."""
    return 2 * sum((popcount(mask) * e.l2sq(mask) for mask in e.components), e.space.zero)


def high_frequency_weight(e: WalshExpansion, k) -> Any:
    """sum_{|S| > k} ||F_S||_2^2."""
    return sum((e.l2sq(mask) for mask in e.components if popcount(mask) > k), e.space.zero)

