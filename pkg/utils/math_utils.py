import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, List, Tuple

import numpy as np

from utils.errors import InvalidParameter

# --- Subsets as bitmasks: bit i set <=> coordinate i in S ---

def mask_from_indices(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask

def indices_from_mask(mask: int) -> Tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)

def popcount(mask: int) -> int:
    return bin(mask).count("1")

def is_subset(a: int, b: int) -> bool:
    """True iff a ⊆ b."""
    return a & ~b == 0

def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of mask in increasing numeric order."""
    subs = []
    sub = mask
    while True:
        subs.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return iter(reversed(subs))

def masks_up_to(n: int, k: float) -> List[int]:
    """All subsets of range(n) of size <= k, ordered by size then lexicographically."""
    out = []
    top = n if k >= n else math.floor(k)
    for size in range(top + 1):
        for combo in combinations(range(n), size):
            out.append(mask_from_indices(combo))
    return out

def subset_sort_key(mask: int):
    """Size first, then lexicographic index tuple."""
    return (popcount(mask), indices_from_mask(mask))

def mask_label(mask: int) -> str:
    return "{" + ",".join(str(i) for i in indices_from_mask(mask)) + "}"

# --- Scalars ---

def to_scalar(value, exact: bool):
    """
    Convert a JSON/CLI number to the arithmetic mode's scalar.
    Exact mode parses through str so that 0.3 becomes 3/10, not its binary expansion.
    """
    if isinstance(value, bool):
        raise InvalidParameter(f"Expected a number, got {value!r}")
    if exact:
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidParameter(f"Cannot parse {value!r} as a rational: {e}")
    try:
        return float(Fraction(str(value).strip())) if isinstance(value, str) else float(value)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidParameter(f"Cannot parse {value!r} as a number: {e}")

def fraction_log2(x: Fraction) -> float:
    """log2 of a positive rational of any size (math.log2 accepts big ints)."""
    x = Fraction(x)
    if x <= 0:
        raise InvalidParameter(f"log2 of non-positive value {x}")
    return math.log2(x.numerator) - math.log2(x.denominator)

# --- Seeds ---

def split_seeds(seed: int, count: int) -> List[int]:
    """
    Child seeds for independent streams, derived from one master seed.
    Child i is the first 64-bit word of SeedSequence(seed).spawn(count)[i].
    """
    children = np.random.SeedSequence(int(seed)).spawn(int(count))
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]

def local_mask(sub: int, mask: int) -> int:
    """Re-index sub (a subset of mask) by position within mask's coordinates."""
    out = 0
    for pos, i in enumerate(indices_from_mask(mask)):
        if sub >> i & 1:
            out |= 1 << pos
    return out

# --- Table reductions ---
# Arithmetic on 0-d object arrays returns bare Fractions, so reduce through np.asarray.

def table_sum(arr):
    return np.asarray(arr).sum()

def table_max(arr, default=0):
    """Largest entry; default for an empty table."""
    arr = np.asarray(arr)
    return arr.max() if arr.size else default

def table_max_abs(arr, default=0):
    return table_max(np.abs(np.asarray(arr)), default)
