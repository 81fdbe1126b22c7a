"""
Increasing-function tooling: finding a small S whose all-ones restriction pushes
E[f] close to 1 (by brute force, or through the atoms of a pseudo-junta), and
FKG correlation checks.
"""
import asyncio
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from models.boolfn import FunctionRep, conditional_mean, is_decreasing, is_increasing, mean
from models.pseudojunta import AtomPartition, JuntaCollection, atoms
from models.space import PartialPoint, ProductSpace, weight_grid
from utils.errors import (
    AlphabetNotBinary,
    InvalidParameter,
    MonotonicityViolated,
    NoQualifyingAtom,
    NotIncreasing,
    SupportMismatch,
)
from utils.logger import logger
from utils.math_utils import indices_from_mask, masks_up_to, popcount, table_sum, to_scalar

METHOD_BRUTE = "brute-force"
METHOD_ATOMS = "atom-based"


@dataclass(frozen=True)
class BoostReport:
    mask: int
    value: Any
    alpha: Any
    epsilon: Any
    method: str
    atom_point: Optional[PartialPoint] = None
    atom_density: Any = None

    @property
    def size(self) -> int:
        return popcount(self.mask)

    def to_doc(self) -> Dict[str, Any]:
        doc = {
            "found": True,
            "S": list(indices_from_mask(self.mask)),
            "value": self.value,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "method": self.method,
        }
        if self.atom_point is not None:
            doc["atom"] = {"S": list(self.atom_point.coords), "y": list(self.atom_point.values),
                           "density": self.atom_density}
        return doc


def _all_ones(mask: int) -> PartialPoint:
    return PartialPoint(mask, (1,) * popcount(mask))


def _check_increasing(f: FunctionRep) -> None:
    if not f.space.is_binary:
        raise AlphabetNotBinary("Boosting restrictions need binary alphabets")
    if not is_increasing(f):
        raise NotIncreasing(f"{f.name} is not increasing")


def _check_bias(space: ProductSpace) -> None:
    half = space.scalar("1/2")
    for i, ws in enumerate(space.weights):
        if ws[1] > half:
            raise InvalidParameter(f"Coordinate {i} has Pr[1] = {ws[1]} > 1/2")


def _target(f: FunctionRep, epsilon):
    eps = to_scalar(epsilon, f.space.exact)
    if not 0 <= eps <= 1:
        raise InvalidParameter(f"epsilon must lie in [0, 1], got {epsilon}")
    return eps, f.space.one - eps


def all_ones_conditionals(f: FunctionRep, masks: List[int]) -> Dict[int, Any]:
    """E[f | x_S = (1, ..., 1)] for each S."""
    return {s: conditional_mean(f, s, _all_ones(s)) for s in masks}


async def boost_bruteforce_async(f: FunctionRep, epsilon, max_size: int) -> Optional[BoostReport]:
    """
    The smallest S (by size, then lexicographically) with |S| <= max_size and
    E[f | x_S = 1...1] >= 1 - epsilon, or None. Each size level is evaluated
    concurrently and the first qualifying S of the lowest level wins.
    """
    _check_increasing(f)
    _check_bias(f.space)
    eps, target = _target(f, epsilon)
    alpha = mean(f)
    masks = masks_up_to(f.n, max_size)
    for size in range(min(max_size, f.n) + 1):
        level = [s for s in masks if popcount(s) == size]
        values = await asyncio.gather(*[asyncio.to_thread(conditional_mean, f, s, _all_ones(s)) for s in level])
        for s, value in zip(level, values):
            if value >= target:
                logger.info(f"Brute force: |S|={size} reaches {value} >= {target}")
                return BoostReport(s, value, alpha, eps, METHOD_BRUTE)
    logger.info(f"Brute force: no S with |S| <= {max_size} reaches {target}")
    return None


def boost_bruteforce(f: FunctionRep, epsilon, max_size: int) -> Optional[BoostReport]:
    return asyncio.run(boost_bruteforce_async(f, epsilon, max_size))


def atom_densities(f: FunctionRep, J: JuntaCollection) -> Tuple[AtomPartition, List[Any]]:
    """E[f | atom] for every atom of F_J, in atom order."""
    partition = atoms(J)
    weighted = (weight_grid(f.space) * f.as_array()).reshape(-1)
    return partition, [weighted[a.members].sum() / a.mass for a in partition.atoms]


def boost_via_atoms(f: FunctionRep, J: JuntaCollection, epsilon) -> BoostReport:
    """
    Take the atoms (S, y0) of F_J whose density E[f | atom] is at least 1 - epsilon,
    best first (highest density, then smallest |S|, then S and y0 lexicographically),
    and return the first S whose all-ones restriction measures at least 1 - epsilon.
    """
    if J.space.sizes != f.space.sizes:
        raise SupportMismatch("Function and collection live on different spaces")
    _check_increasing(f)
    _check_bias(f.space)
    eps, target = _target(f, epsilon)
    partition, densities = atom_densities(f, J)
    qualifying = [(d, a) for d, a in zip(densities, partition.atoms) if d >= target]
    qualifying.sort(key=lambda da: (-da[0], popcount(da[1].mask), indices_from_mask(da[1].mask), da[1].point.values))
    logger.info(f"{len(qualifying)} of {len(partition.atoms)} atoms have density >= {target}")

    alpha = mean(f)
    for density, atom in qualifying:
        value = conditional_mean(f, atom.mask, _all_ones(atom.mask))
        if value >= target:
            return BoostReport(atom.mask, value, alpha, eps, METHOD_ATOMS, atom.point, density)
        logger.warning(f"Atom on {list(atom.point.coords)} has density {density} but the all-ones value is {value}")
    raise NoQualifyingAtom(f"No atom of F_J reaches density {target} with a qualifying all-ones restriction")


@dataclass(frozen=True)
class FkgReport:
    joint: Any
    product: Any
    passed: bool

    def to_doc(self) -> Dict[str, Any]:
        return {"joint": self.joint, "product": self.product, "pass": self.passed}


def fkg_check(g1: FunctionRep, g2: FunctionRep) -> FkgReport:
    """int g1 g2 <= int g1 * int g2 for g1 increasing and g2 decreasing."""
    if g1.space.sizes != g2.space.sizes:
        raise SupportMismatch("FKG check needs both functions on the same space")
    if not is_increasing(g1):
        raise MonotonicityViolated(f"{g1.name} is not increasing")
    if not is_decreasing(g2):
        raise MonotonicityViolated(f"{g2.name} is not decreasing")
    space = g1.space
    joint = table_sum(weight_grid(space) * g1.as_array() * g2.as_array())
    product = mean(g1) * mean(g2)
    slack = 0 if space.exact else 1e-12
    return FkgReport(joint, product, bool(joint <= product + slack))


def conditionals_nondecreasing(f: FunctionRep) -> bool:
    """E[f | x_S = 1...1] never drops when S grows by one coordinate."""
    values = all_ones_conditionals(f, masks_up_to(f.n, f.n))
    return all(values[s] <= values[s | 1 << i] for s in values for i in range(f.n) if not s >> i & 1)
