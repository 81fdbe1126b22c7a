"""
Pseudo-junta constructions: given a Boolean f, build a collection J and a
Boolean h measurable with respect to F_J, then measure ||f - h||_1 and cost(J).

p-biased mode:
  expand -> select S by ||F_S||_inf > eps1 -> J_T(y) = [activation(T) >= delta mu(y)]
  -> E[f | F_J] -> round at 1/2
general mode:
  expand -> select S by L2 concentration -> psi_S, G_S, a_S -> xi_T, J_T
  -> E[f | F_J] -> round at 1/2

Every threshold uses the comparator of its definition (>= or >) and works in the
space's arithmetic, so boundary cases are decided exactly in exact mode.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from analysis.influence import total_influence_exact
from models.boolfn import FunctionRep, l1_distance, l2_distance_sq, mean
from models.pseudojunta import (
    AtomPartition,
    JuntaCollection,
    atoms,
    conditional_expectation,
    cost,
    entry_mass,
    make_collection,
    restrict_collection,
    round_half,
)
from models.schedule import ParameterSchedule, schedule
from models.space import ProductSpace, marginal_array, measure, weight_grid
from models.walsh import (
    WalshExpansion,
    expand_to,
    high_frequency_weight,
    total_influence_from_norms,
    walsh_components,
    walsh_expand,
)
from utils.errors import InvalidParameter, ScheduleInfeasible
from utils.logger import logger
from utils.math_utils import (
    indices_from_mask,
    is_subset,
    iter_submasks,
    local_mask,
    mask_label,
    popcount,
    subset_sort_key,
    table_max_abs,
    table_sum,
)


def _local_weights(space: ProductSpace, mask: int) -> List[np.ndarray]:
    return [space.weight_array(i) for i in indices_from_mask(mask)]


def _indicator(arr: np.ndarray, space: ProductSpace) -> np.ndarray:
    return space.asarray(np.asarray(arr).astype(np.int8))


def _fiber_closure(ind: np.ndarray, weights: List[np.ndarray], base) -> np.ndarray:
    """
    1 at y iff for some R, int ind(y_R, x) dx >= base^{2|rest|}, i.e.
    max_R base^{-2|T \\ R|} int ind(y_R, x_{T \\ R}) >= 1.
    """
    m = ind.ndim
    full = (1 << m) - 1
    out = np.zeros(ind.shape, dtype=bool)
    for r in iter_submasks(full):
        marg = marginal_array(ind, weights, r)
        hit = np.asarray(marg >= base ** (2 * (m - popcount(r)))).astype(bool)
        out = out | expand_to(hit, r, full, ind.shape)
    return np.asarray(out).astype(np.int8)


# --- Selection ---

def select_pbiased(e: WalshExpansion, k, eps1) -> List[int]:
    """{S : |S| <= k, ||F_S||_inf > eps1}"""
    return sorted((s for s in e.components if popcount(s) <= k and e.linf(s) > eps1), key=subset_sort_key)


def select_general(e: WalshExpansion, k, eps0, eps1) -> List[int]:
    """
    {S : |S| <= k, int F_S^2 1[|F_S| <= eps1] <= (eps0 / k) int F_S^2}, without the
    identically zero components.
    """
    space = e.space
    selected = []
    for s, arr in e.components.items():
        if popcount(s) > k or e.l2sq(s) == 0:
            continue
        low = _indicator(np.abs(arr) <= eps1, space)
        small = table_sum(weight_grid(space, s) * arr * arr * low)
        if small <= eps0 / k * e.l2sq(s):
            selected.append(s)
    return sorted(selected, key=subset_sort_key)


# --- p-biased collection ---

def activation_masses(e: WalshExpansion, selected: List[int], k, eps1) -> Dict[int, Any]:
    """For each nonempty T with |T| <= k: sum over selected S containing T of int 1[|F_S| >= eps1]."""
    space = e.space
    mass = {s: table_sum(weight_grid(space, s) * _indicator(np.abs(e.component(s)) >= eps1, space))
            for s in selected}
    out: Dict[int, Any] = {}
    for s in selected:
        for t in iter_submasks(s):
            if t and popcount(t) <= k:
                out[t] = out.get(t, space.zero) + mass[s]
    return out


def build_J_pbiased(e: WalshExpansion, selected: List[int], k, delta, eps1,
                    max_arity: Optional[int] = None) -> Tuple[JuntaCollection, Dict[int, Any]]:
    """
    J_T(y) = 1 iff activation(T) >= delta * mu(y); activation does not depend on y,
    so J_T is a threshold on the measure of y (increasing when p <= 1/2).
    """
    space = e.space
    activation = activation_masses(e, selected, k, eps1)
    tables = {t: np.asarray(mass >= delta * weight_grid(space, t)).astype(np.int8) for t, mass in activation.items()}
    J = make_collection(space, tables, max_arity)
    logger.info(f"p-biased collection: {len(J.entries)} active entries from {len(activation)} candidates")
    return J, activation


# --- general-mode artifacts ---

def psi(space: ProductSpace, mask: int, component: np.ndarray, delta, eps1) -> np.ndarray:
    """psi_S(y) = 1 iff max_T delta^{-2|S \\ T|} int 1[|F_S(y_T, x)| > eps1] dx >= 1."""
    ind = _indicator(np.abs(component) > eps1, space)
    return _fiber_closure(ind, _local_weights(space, mask), delta)


@dataclass(frozen=True, eq=False)
class ModifiedComponent:
    G: np.ndarray
    residues: Dict[int, np.ndarray]  # local mask T (proper subset of S) -> H_T over X^T


def modified_component(space: ProductSpace, mask: int, component: np.ndarray,
                       psi_table: np.ndarray) -> ModifiedComponent:
    """Walsh-expand F_S psi_S on X^S; G_S is its top component, the rest are residues."""
    product = space.asarray(component * space.asarray(psi_table))
    comps = walsh_components(product, _local_weights(space, mask))
    top = (1 << popcount(mask)) - 1
    return ModifiedComponent(comps[top], {t: arr for t, arr in comps.items() if t != top})


def a_weight(space: ProductSpace, mask: int, component: np.ndarray, k, delta, eps1) -> np.ndarray:
    """a_S(y) = 2^{3k} delta^{-2k} sum_T int 1[|F_S(y_{S \\ T}, x_T)| > eps1] dx_T."""
    ind = _indicator(np.abs(component) > eps1, space)
    weights = _local_weights(space, mask)
    m = ind.ndim
    full = (1 << m) - 1
    total = np.zeros(ind.shape, dtype=space.dtype)
    for keep in iter_submasks(full):
        total = total + expand_to(marginal_array(ind, weights, keep), keep, full, ind.shape)
    scale = 2 ** (3 * k) * delta ** (-2 * k)
    return space.asarray(total * scale)


def xi(space: ProductSpace, t: int, selected: List[int], a_tables: Dict[int, np.ndarray], eps2) -> np.ndarray:
    """xi_T(y) = 1 iff sum_{R subset T} sum_{S in selected, S contains T} int a_S(y_R, x) dx > eps2."""
    total = np.zeros(space.sizes_of(t), dtype=space.dtype)
    for s in selected:
        if not is_subset(t, s):
            continue
        weights = _local_weights(space, s)
        for r in iter_submasks(t):
            marg = marginal_array(a_tables[s], weights, local_mask(r, s))
            total = total + expand_to(marg, r, t, space.sizes)
    return np.asarray(total > eps2).astype(np.int8)


def build_J_general(space: ProductSpace, selected: List[int], a_tables: Dict[int, np.ndarray], k,
                    delta0, eps2, max_arity: Optional[int] = None
                    ) -> Tuple[JuntaCollection, Dict[int, np.ndarray], Dict[int, np.ndarray]]:
    """
    xi_T for every T with |T| <= k inside some selected S (xi_T is 0 elsewhere),
    then J_T(y) = 1 iff max_R delta0^{-2|T \\ R|} int xi_T(y_R, x) dx >= 1.
    Returns the collection with the xi and J tables (including T = empty).
    """
    candidates = set()
    for s in selected:
        candidates.update(t for t in iter_submasks(s) if popcount(t) <= k)
    xi_tables: Dict[int, np.ndarray] = {}
    j_tables: Dict[int, np.ndarray] = {}
    for t in sorted(candidates, key=subset_sort_key):
        xi_tables[t] = xi(space, t, selected, a_tables, eps2)
        j_tables[t] = _fiber_closure(space.asarray(xi_tables[t]), _local_weights(space, t), delta0)
    J = make_collection(space, {t: arr for t, arr in j_tables.items() if t}, max_arity)
    logger.info(f"general collection: {len(J.entries)} active entries from {len(candidates)} candidates")
    return J, xi_tables, j_tables


# --- Pipeline ---

@dataclass(frozen=True, eq=False)
class ConstructorState:
    mode: str
    schedule: ParameterSchedule
    constants: Dict[str, Any]
    expansion: WalshExpansion
    selected: List[int]
    collection: JuntaCollection
    partition: AtomPartition
    approximation: np.ndarray
    conditional: FunctionRep
    h: FunctionRep
    activation: Dict[int, Any] = field(default_factory=dict)
    psi: Dict[int, np.ndarray] = field(default_factory=dict)
    modified: Dict[int, ModifiedComponent] = field(default_factory=dict)
    a: Dict[int, np.ndarray] = field(default_factory=dict)
    xi: Dict[int, np.ndarray] = field(default_factory=dict)
    j_tables: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def space(self) -> ProductSpace:
        return self.expansion.space

    @property
    def k(self) -> int:
        return self.schedule.k


@dataclass(frozen=True, eq=False)
class ConstructionResult:
    h: FunctionRep
    collection: JuntaCollection
    report: Dict[str, Any]
    state: ConstructorState


def _constants(sched: ParameterSchedule, exact: bool) -> Dict[str, Any]:
    consts = {name: sched.scalar(name, exact) for name in sched.fields if name not in ("C", "k")}
    zero = [name for name, v in consts.items() if v == 0]
    if zero:
        raise ScheduleInfeasible(f"{zero} underflow to 0 in float arithmetic; use exact arithmetic")
    return consts


def construct(f: FunctionRep, epsilon, mode: str = "pbiased", overrides=None,
              budget: Optional[int] = None) -> ConstructionResult:
    """
    Run the full pipeline. Without overrides the full schedule is used and
    is refused when it cannot be materialized within the bit budget.
    """
    if not f.boolean:
        raise InvalidParameter("construct needs a Boolean function")
    space = f.space
    if mode == "pbiased":
        if space.bias is None:
            raise InvalidParameter("p-biased mode needs a homogeneous binary space")
        if space.bias > space.scalar("1/2"):
            logger.warning(f"p = {space.bias} > 1/2: the constructed J_T need not be increasing")

    influence = total_influence_exact(f)
    C = max(1, math.ceil(influence))
    sched = schedule(C, epsilon, mode, overrides, budget)
    sched.require_feasible()
    k = sched.k
    consts = _constants(sched, space.exact)
    eps0, eps1, delta = consts["eps0"], consts["eps1"], consts["delta"]

    e = walsh_expand(f)
    extra: Dict[str, Any] = {}
    if mode == "pbiased":
        selected = select_pbiased(e, k, eps1)
        J, activation = build_J_pbiased(e, selected, k, delta, eps1)
        approx = np.zeros(space.sizes, dtype=space.dtype)
        for s in selected:
            approx = approx + e.embed(s)
        extra["activation"] = activation
    else:
        selected = select_general(e, k, eps0, eps1)
        psis, modified, a_tables = {}, {}, {}
        approx = np.zeros(space.sizes, dtype=space.dtype)
        for s in selected:
            comp = e.component(s)
            psis[s] = psi(space, s, comp, delta, eps1)
            modified[s] = modified_component(space, s, comp, psis[s])
            a_tables[s] = a_weight(space, s, comp, k, delta, eps1)
            approx = approx + expand_to(modified[s].G, s, space.full_mask, space.sizes)
        J, xi_tables, j_tables = build_J_general(space, selected, a_tables, k, consts["delta0"], consts["eps2"])
        extra.update(psi=psis, modified=modified, a=a_tables, xi=xi_tables, j_tables=j_tables)
    logger.info(f"Selected {len(selected)} components: {[mask_label(s) for s in selected]}")

    partition = atoms(J)
    ce = conditional_expectation(f, J, partition)
    h = round_half(ce)
    state = ConstructorState(mode, sched, consts, e, selected, J, partition, approx, ce, h, **extra)

    diff = f.as_array() - approx
    report = {
        "mode": mode,
        "n": space.n,
        "epsilon": sched.epsilon,
        "total_influence": influence,
        "alpha": mean(f),
        "l1_error": l1_distance(f, h),
        "cost": cost(J),
        "l2_error_conditional": l2_distance_sq(f, ce),
        "l2_error_approximation": table_sum(weight_grid(space) * diff * diff),
        "selected": [list(indices_from_mask(s)) for s in selected],
        "selected_count": len(selected),
        "entry_mass_total": sum((entry_mass(J, t) for t in J.entries), space.zero),
        "max_arity": J.max_arity,
        "atom_count": len(partition.atoms),
        "collection": [list(indices_from_mask(t)) for t in J.masks],
        "schedule": sched.to_doc(),
        "overridden": sched.overridden,
        "guarantee": None if sched.overridden else "l1_error <= epsilon",
    }
    logger.info(f"Constructed h with ||f-h||_1 = {report['l1_error']}, cost {report['cost']}")
    return ConstructionResult(h, J, report, state)


# --- Invariant checkers ---

def _slack(space: ProductSpace):
    return 0 if space.exact else 1e-9


def check_high_frequency_tail(e: WalshExpansion, k) -> bool:
    """sum_{|S| > k} ||F_S||_2^2 <= I_f / k."""
    return high_frequency_weight(e, k) <= total_influence_from_norms(e) / k + _slack(e.space)


def check_smoothing(state: ConstructorState) -> bool:
    """||H_T||_inf <= delta for every residue of F_S psi_S."""
    delta = state.constants["delta"]
    return all(table_max_abs(arr) <= delta + _slack(state.space)
               for m in state.modified.values() for arr in m.residues.values())


def check_a_domination(state: ConstructorState) -> bool:
    """|G_S| <= a_S pointwise."""
    return all(np.all(np.abs(state.modified[s].G) <= state.a[s] + _slack(state.space)) for s in state.selected)


def check_a_total(state: ConstructorState) -> bool:
    """sum_S int a_S <= delta^{-3k}."""
    space = state.space
    total = sum((table_sum(weight_grid(space, s) * state.a[s]) for s in state.selected), space.zero)
    return total <= state.constants["delta"] ** (-3 * state.k) + _slack(space)


def check_dichotomy(J: JuntaCollection, delta0) -> bool:
    """
    For every entry T, R subset of T and y on R: either int J_T(y, x) dx <= delta0
    or J_T(y, z) = 1 for every z.
    """
    space = J.space
    for t, arr in J.entries.items():
        weights = _local_weights(space, t)
        values = space.asarray(arr)
        m = arr.ndim
        for r in iter_submasks((1 << m) - 1):
            marg = marginal_array(values, weights, r)
            fiber_min = arr
            for axis in reversed(range(m)):
                if not r >> axis & 1:
                    fiber_min = fiber_min.min(axis=axis)
            if not np.all((np.asarray(marg) <= delta0) | (np.asarray(fiber_min) == 1)):
                return False
    return True


def check_sandwich(state: ConstructorState) -> bool:
    """1[|F_S| > eps1] <= xi_S <= J_S for every selected S."""
    eps1 = state.constants["eps1"]
    for s in state.selected:
        ind = np.asarray(np.abs(state.expansion.component(s)) > eps1).astype(np.int8)
        x = state.xi[s]
        j = state.j_tables[s]
        if not (np.all(ind <= x) and np.all(x <= j)):
            return False
    return True


def check_cost_accounting(J: JuntaCollection, k) -> bool:
    """cost(J) <= k * sum_T int J_T when every entry has |T| <= k."""
    total = sum((entry_mass(J, t) for t in J.entries), J.space.zero)
    return cost(J) <= max(k, J.max_arity) * total + _slack(J.space)


def check_fat_atoms(state: ConstructorState) -> bool:
    """For S selected, each atom of F_{J_S} fills at least half of its fiber x_A = y."""
    space = state.space
    half = space.scalar("1/2")
    for s in state.selected:
        part = atoms(restrict_collection(state.collection, s))
        for atom in part.atoms:
            if atom.mass / measure(space, atom.point) < half - _slack(space):
                return False
    return True


def check_rounding(f: FunctionRep, conditional: FunctionRep, h: FunctionRep) -> bool:
    """||f - h||_1 <= 4 ||f - E[f | F_J]||_2^2 for Boolean f."""
    return l1_distance(f, h) <= 4 * l2_distance_sq(f, conditional) + _slack(f.space)


def check_monotone_entries(J: JuntaCollection) -> bool:
    """Every stored J_T is increasing (binary alphabets)."""
    for arr in J.entries.values():
        for axis in range(arr.ndim):
            if not np.all(np.take(arr, 0, axis=axis) <= np.take(arr, 1, axis=axis)):
                return False
    return True


def run_checks(f: FunctionRep, result: ConstructionResult) -> Dict[str, bool]:
    """Every checker that applies to the result's mode."""
    state = result.state
    checks = {
        "high_frequency_tail": check_high_frequency_tail(state.expansion, state.k),
        "cost_accounting": check_cost_accounting(state.collection, state.k),
        "rounding": check_rounding(f, state.conditional, state.h),
    }
    if state.mode == "pbiased":
        if state.space.bias <= state.space.scalar("1/2"):
            checks["monotone_entries"] = check_monotone_entries(state.collection)
    else:
        checks.update(
            smoothing=check_smoothing(state),
            a_domination=check_a_domination(state),
            a_total=check_a_total(state),
            dichotomy=check_dichotomy(state.collection, state.constants["delta0"]),
            sandwich=check_sandwich(state),
            fat_atoms=check_fat_atoms(state),
        )
    return checks
