"""
Collections J = {J_S} of Boolean detectors, the revealed-coordinate map
J_J(x) = union{S : J_S(x_S) = 1}, the atoms of the sigma-algebra it generates,
conditional expectations onto that sigma-algebra, and rounding.

Collections are sparse: only entries with J_S not identically 0 are stored,
each as an int8 table over X^S.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from config import MAX_ARITY
from models.boolfn import FunctionRep, from_table, marginal_table
from models.space import (
    PartialPoint,
    ProductSpace,
    all_points,
    check_cap,
    check_point,
    sample,
    weight_grid,
)
from utils.errors import (
    InvalidParameter,
    NonBooleanValue,
    NotMeasurable,
    SupportMismatch,
    TableLengthMismatch,
    malformed,
)
from utils.logger import logger
from utils.math_utils import indices_from_mask, is_subset, mask_from_indices, popcount, subset_sort_key, table_sum


@dataclass(frozen=True, eq=False)
class JuntaCollection:
    space: ProductSpace
    entries: Dict[int, np.ndarray]

    @property
    def max_arity(self) -> int:
        return max((popcount(s) for s in self.entries), default=0)

    @property
    def masks(self) -> List[int]:
        return sorted(self.entries, key=subset_sort_key)

    def entry(self, mask: int) -> np.ndarray:
        """J_S as a table over X^S; zeros when S is not stored."""
        if mask in self.entries:
            return self.entries[mask]
        return np.zeros(self.space.sizes_of(mask), dtype=np.int8)

    def to_doc(self) -> Dict[str, Any]:
        return {"entries": [
            {"S": list(indices_from_mask(s)), "J": {"kind": "table", "values": self.entries[s].reshape(-1).tolist()}}
            for s in self.masks
        ]}


def make_collection(space: ProductSpace, entries: Mapping[int, Any],
                    max_arity: Optional[int] = None) -> JuntaCollection:
    """Validate and store entries {S: table over X^S}; all-zero entries are dropped."""
    cap = MAX_ARITY if max_arity is None else max_arity
    stored: Dict[int, np.ndarray] = {}
    for mask, values in entries.items():
        if mask & ~space.full_mask:
            raise SupportMismatch(f"Entry S={list(indices_from_mask(mask))} exceeds n={space.n}")
        if popcount(mask) > cap:
            raise InvalidParameter(f"Entry of arity {popcount(mask)} exceeds the arity cap {cap}")
        arr = np.asarray(values)
        if arr.size != space.count_of(mask):
            raise TableLengthMismatch(
                f"J_S for S={list(indices_from_mask(mask))} has {arr.size} values, expected {space.count_of(mask)}"
            )
        if not np.all((arr == 0) | (arr == 1)):
            raise NonBooleanValue(f"J_S for S={list(indices_from_mask(mask))} is not Boolean")
        arr = arr.astype(np.int8).reshape(space.sizes_of(mask))
        if arr.any():
            arr.flags.writeable = False
            stored[mask] = arr
    return JuntaCollection(space, stored)


def empty_collection(space: ProductSpace) -> JuntaCollection:
    return JuntaCollection(space, {})


def junta_collection(space: ProductSpace, coords: Iterable[int]) -> JuntaCollection:
    """{J_A = 1}: reveals A everywhere, so F_J is generated by x_A."""
    mask = mask_from_indices(coords)
    return make_collection(space, {mask: np.ones(space.sizes_of(mask), dtype=np.int8)})


def all_ones_indicator(space: ProductSpace, mask: int) -> np.ndarray:
    """1 iff x_S = (1, ..., 1); binary alphabets only."""
    arr = np.zeros(space.sizes_of(mask), dtype=np.int8)
    arr[(1,) * popcount(mask)] = 1
    return arr


def or_example_collection(space: ProductSpace, max_size: int = 1) -> JuntaCollection:
    """
    J_S(x) = 1 iff x_S is all ones, for every nonempty S with |S| <= max_size.
    J_J(x) = {i : x_i = 1} for any max_size >= 1.
    """
    if not space.is_binary:
        raise InvalidParameter("The OR-example collection needs binary alphabets")
    entries = {}
    for size in range(1, min(max_size, space.n) + 1):
        for combo in combinations(range(space.n), size):
            mask = mask_from_indices(combo)
            entries[mask] = all_ones_indicator(space, mask)
    return make_collection(space, entries, max_arity=max(max_size, 1))


def restrict_collection(J: JuntaCollection, mask: int) -> JuntaCollection:
    """J_S: keep only entries T subset of S."""
    return JuntaCollection(J.space, {t: arr for t, arr in J.entries.items() if is_subset(t, mask)})


def dominates(bigger: JuntaCollection, smaller: JuntaCollection) -> bool:
    """True iff bigger.J_S >= smaller.J_S pointwise for every S."""
    return all(np.all(bigger.entry(s) >= arr) for s, arr in smaller.entries.items())


def load_collection(doc: Mapping[str, Any], space: ProductSpace) -> JuntaCollection:
    """
    {"entries": [{"S": [indices], "J": {"kind": "table", "values": [...]}
                                     | {"kind": "all-ones-indicator"} | {"kind": "const1"}}]}
    or {"builtin": "or-example", "max_size": k} / {"builtin": "junta", "A": [indices]}.
    """
    with malformed("collection spec"):
        if "builtin" in doc:
            name = doc["builtin"]
            if name == "or-example":
                return or_example_collection(space, int(doc.get("max_size", 1)))
            if name == "junta":
                return junta_collection(space, doc.get("A", []))
            if name == "empty":
                return empty_collection(space)
            raise InvalidParameter(f"Unknown collection builtin {name!r}")
        entries: Dict[int, Any] = {}
        for item in doc.get("entries", []):
            mask = mask_from_indices(item.get("S", []))
            rule = item.get("J", {})
            kind = rule.get("kind")
            if kind == "table":
                values = rule.get("values", [])
                entries[mask] = [int(c) for c in values] if isinstance(values, str) else values
            elif kind == "all-ones-indicator":
                entries[mask] = all_ones_indicator(space, mask)
            elif kind == "const1":
                entries[mask] = np.ones(space.sizes_of(mask), dtype=np.int8)
            elif kind == "const0":
                continue
            else:
                raise InvalidParameter(f"Unknown collection entry kind {kind!r}")
        return make_collection(space, entries)


# --- The revealed-coordinate map ---

def junta_map(J: JuntaCollection, x: PartialPoint) -> int:
    check_point(J.space, x)
    if x.support != J.space.full_mask:
        raise SupportMismatch("junta_map needs a full point")
    result = 0
    for mask, arr in J.entries.items():
        if arr[tuple(x.values[i] for i in indices_from_mask(mask))]:
            result |= mask
    return result


def junta_masks(J: JuntaCollection) -> np.ndarray:
    """J_J(x) for every x, as an int64 array of shape space.sizes."""
    space = J.space
    check_cap(space, space.full_mask)
    full = space.full_mask
    out = np.zeros(space.sizes, dtype=np.int64)
    for mask, arr in J.entries.items():
        shape = [space.sizes[i] if mask >> i & 1 else 1 for i in range(space.n)]
        out |= np.where(arr.reshape(shape) == 1, mask, 0) & full
    return out


def junta_masks_at(J: JuntaCollection, points: np.ndarray) -> np.ndarray:
    """J_J(x) for each row of points."""
    out = np.zeros(len(points), dtype=np.int64)
    for mask, arr in J.entries.items():
        coords = list(indices_from_mask(mask))
        fired = arr[tuple(points[:, coords].T)] if coords else np.full(len(points), arr[()])
        out |= np.where(fired == 1, mask, 0)
    return out


def mask_sizes(masks: np.ndarray, n: int) -> np.ndarray:
    sizes = np.zeros(masks.shape, dtype=np.int64)
    for i in range(n):
        sizes += (masks >> i) & 1
    return sizes


def cost(J: JuntaCollection):
    """int |J_J(x)| dx."""
    sizes = mask_sizes(junta_masks(J), J.space.n)
    return table_sum(weight_grid(J.space) * sizes)


def cost_mc(J: JuntaCollection, seed: int, samples: int) -> Tuple[float, float]:
    """Monte Carlo estimate of the cost and its standard error."""
    points = sample(J.space, seed, samples)
    sizes = mask_sizes(junta_masks_at(J, points), J.space.n).astype(np.float64)
    se = float(sizes.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return float(sizes.mean()), se


def entry_mass(J: JuntaCollection, mask: int):
    """int J_S dx_S."""
    return table_sum(weight_grid(J.space, mask) * J.entry(mask))


# --- Atoms of F_J ---

@dataclass(frozen=True, eq=False)
class Atom:
    mask: int
    point: PartialPoint
    members: np.ndarray  # flat indices into X^n, increasing
    mass: Any

    def to_doc(self) -> Dict[str, Any]:
        return {"S": list(indices_from_mask(self.mask)), "y": list(self.point.values),
                "size": int(self.members.size), "mass": self.mass}


@dataclass(frozen=True, eq=False)
class AtomPartition:
    space: ProductSpace
    atoms: List[Atom]
    index: np.ndarray  # flat point index -> atom position

    def atom_of(self, x: PartialPoint) -> Atom:
        flat = int(np.ravel_multi_index(tuple(x.values), self.space.sizes)) if self.space.n else 0
        return self.atoms[int(self.index[flat])]

    @property
    def total_mass(self):
        return sum((a.mass for a in self.atoms), self.space.zero)


def _strides(sizes) -> np.ndarray:
    strides = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    return strides


def _group_sums(values: np.ndarray, order: np.ndarray, starts: np.ndarray) -> np.ndarray:
    return np.add.reduceat(values[order], starts)


def atoms(J: JuntaCollection) -> AtomPartition:
    """
    Partition X^n by the key (J_J(x), x restricted to J_J(x)). Atoms are listed in
    order of their first member in enumeration order.
    """
    space = J.space
    masks = junta_masks(J).reshape(-1)
    count = masks.size
    points = all_points(space)
    strides = _strides(space.sizes)
    anchor = np.zeros(count, dtype=np.int64)
    for i in range(space.n):
        anchor += ((masks >> i) & 1) * points[:, i] * strides[i]
    keys = masks * count + anchor

    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    by_first = np.argsort(first, kind="stable")
    rank = np.empty_like(by_first)
    rank[by_first] = np.arange(by_first.size)
    index = rank[inverse.reshape(-1)]

    order = np.argsort(index, kind="stable")
    counts = np.bincount(index, minlength=by_first.size)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    masses = _group_sums(weight_grid(space).reshape(-1), order, starts)

    result = []
    for a in range(by_first.size):
        members = order[starts[a]:starts[a] + counts[a]]
        head = int(members[0])
        mask = int(masks[head])
        coords = indices_from_mask(mask)
        point = PartialPoint(mask, tuple(int(points[head, i]) for i in coords))
        result.append(Atom(mask, point, members, masses[a]))
    logger.info(f"F_J has {len(result)} atoms over {count} points")
    return AtomPartition(space, result, index)


def conditional_expectation(f: FunctionRep, J: JuntaCollection,
                            partition: Optional[AtomPartition] = None) -> FunctionRep:
    """E[f | F_J]: on each atom, the mass-weighted average of f."""
    partition = atoms(J) if partition is None else partition
    space = f.space
    weighted = (weight_grid(space) * f.as_array()).reshape(-1)
    values = np.empty(len(partition.atoms), dtype=space.dtype)
    for a, atom in enumerate(partition.atoms):
        values[a] = weighted[atom.members].sum() / atom.mass
    table = values[partition.index]
    return from_table(space, table.tolist(), boolean=False, name=f"E[{f.name}|F_J]")


def is_measurable(h: FunctionRep, J: JuntaCollection, partition: Optional[AtomPartition] = None) -> bool:
    """True iff h is constant on every atom."""
    partition = atoms(J) if partition is None else partition
    flat = h.values.reshape(-1)
    heads = np.array([int(a.members[0]) for a in partition.atoms], dtype=np.int64)
    return bool(np.all(flat == flat[heads[partition.index]]))


def round_half(g: FunctionRep) -> FunctionRep:
    """h = 1 where g > 1/2, else 0 (the boundary goes to 0)."""
    half = g.space.scalar("1/2")
    table = np.asarray(g.as_array() > half).astype(np.int8)
    return from_table(g.space, table.reshape(-1).tolist(), boolean=True, name=f"round({g.name})")


@dataclass(frozen=True)
class PropDirectReport:
    influence: Any
    twice_cost: Any
    passed: bool


def check_prop_direct(J: JuntaCollection, h: FunctionRep) -> PropDirectReport:
    """For F_J-measurable Boolean h: I_h <= 2 * cost(J)."""
    from analysis.influence import total_influence_exact

    if not is_measurable(h, J):
        raise NotMeasurable(f"{h.name} is not measurable with respect to F_J")
    influence = total_influence_exact(h)
    twice = 2 * cost(J)
    return PropDirectReport(influence, twice, bool(influence <= twice))


def junta_distance(f: FunctionRep, coords: Iterable[int]):
    """
    L1 distance from f to the nearest Boolean function of x_A:
    sum_y Pr[x_A = y] * min(c_y, 1 - c_y), c_y = E[f | x_A = y].
    """
    mask = mask_from_indices(coords)
    c = marginal_table(f, mask)
    one = f.space.one
    closest = np.where(c < one - c, c, one - c)
    return table_sum(weight_grid(f.space, mask) * closest)
