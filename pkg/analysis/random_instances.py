"""
Seeded generators shared by the verify suites and the tests. Every generator
takes a numpy Generator so that one master seed drives a whole run.
"""
from typing import Optional, Sequence

import numpy as np

from models.boolfn import FunctionRep, from_table
from models.pseudojunta import JuntaCollection, atoms, make_collection
from models.space import ProductSpace, all_points, pbiased_space
from utils.math_utils import masks_up_to

BIASES = ("1/4", "1/3", "1/2")


def random_space(rng: np.random.Generator, n: int, biases: Sequence[str] = BIASES,
                 arith: str = "exact") -> ProductSpace:
    """A p-biased cube with p drawn from biases."""
    return pbiased_space(n, biases[int(rng.integers(len(biases)))], arith)


def random_boolean(space: ProductSpace, rng: np.random.Generator, name: str = "random") -> FunctionRep:
    values = rng.integers(0, 2, size=space.outcome_count)
    return from_table(space, values.tolist(), boolean=True, name=name)


def random_increasing(space: ProductSpace, rng: np.random.Generator,
                      minterms: Optional[int] = None) -> FunctionRep:
    """The up-closure of a few random points: f(x) = 1 iff x >= some minterm."""
    points = all_points(space)
    count = int(rng.integers(1, 4)) if minterms is None else minterms
    chosen = points[rng.integers(len(points), size=count)]
    table = np.zeros(len(points), dtype=np.int8)
    for m in chosen:
        table |= np.all(points >= m, axis=1).astype(np.int8)
    return from_table(space, table.tolist(), boolean=True, name="random-increasing")


def random_decreasing(space: ProductSpace, rng: np.random.Generator) -> FunctionRep:
    """x -> g(1 - x) for a random increasing g."""
    g = random_increasing(space, rng)
    table = np.flip(g.values).reshape(-1)
    return from_table(space, table.tolist(), boolean=True, name="random-decreasing")


def random_collection(space: ProductSpace, rng: np.random.Generator, max_arity: int = 2,
                      keep: float = 0.5) -> JuntaCollection:
    """Each nonempty S with |S| <= max_arity gets a random table with probability keep."""
    entries = {}
    for mask in masks_up_to(space.n, max_arity):
        if mask and rng.random() < keep:
            entries[mask] = rng.integers(0, 2, size=space.count_of(mask)).astype(np.int8)
    return make_collection(space, entries)


def random_measurable(J: JuntaCollection, rng: np.random.Generator) -> FunctionRep:
    """A random Boolean h constant on every atom of F_J."""
    partition = atoms(J)
    bits = rng.integers(0, 2, size=len(partition.atoms)).astype(np.int8)
    return from_table(J.space, bits[partition.index].tolist(), boolean=True, name="random-measurable")


def dominating_collection(J: JuntaCollection, rng: np.random.Generator) -> JuntaCollection:
    """Turn on a random extra set of points in every stored entry, and possibly add entries."""
    space = J.space
    entries = {}
    for mask in masks_up_to(space.n, max(J.max_arity, 1)):
        if not mask:
            continue
        base = J.entry(mask)
        extra = rng.integers(0, 2, size=base.shape).astype(np.int8)
        entries[mask] = base | extra
    return make_collection(space, entries)
