"""
Functions on X^n: explicit truth tables and builtins.

Tables are numpy arrays of shape space.sizes (mixed-radix, enumeration order).
Builtins above the enumeration cap stay lazy and carry only a vectorized
evaluator. Builtins that depend only on the Hamming weight also carry a
weight profile, which gives exact means, conditional means and influences on
homogeneous p-biased cubes without touching the 2^n table.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from config import ENUM_CAP
from models.space import (
    PartialPoint,
    ProductSpace,
    all_points,
    check_point,
    check_cap,
    make_space,
    marginal_array,
    weight_grid,
)
from utils.errors import (
    AlphabetNotBinary,
    EnumerationCapExceeded,
    InvalidParameter,
    NonBooleanValue,
    SupportMismatch,
    TableLengthMismatch,
    UnknownBuiltin,
    malformed,
)
from utils.logger import logger
from utils.math_utils import indices_from_mask, popcount, table_sum, to_scalar

Evaluator = Callable[[np.ndarray], np.ndarray]

BUILTIN_NAMES = frozenset(
    ["const0", "const1", "dictator", "or", "and", "parity", "parity_even", "majority", "threshold", "tribes"]
)


@dataclass(frozen=True, eq=False)
class FunctionRep:
    space: ProductSpace
    table: Optional[np.ndarray]
    boolean: bool = True
    name: str = "table"
    params: Mapping[str, Any] = field(default_factory=dict)
    evaluator: Optional[Evaluator] = None
    profile: Optional[Tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def is_lazy(self) -> bool:
        return self.table is None

    @property
    def symmetric(self) -> bool:
        """Weight-profile fast path applies (symmetric builtin on a homogeneous p-biased cube)."""
        return self.profile is not None and self.space.bias is not None

    @property
    def values(self) -> np.ndarray:
        if self.table is None:
            raise EnumerationCapExceeded(
                f"{self.name} on {self.space.outcome_count} outcomes has no materialized table"
            )
        return self.table

    def as_array(self) -> np.ndarray:
        """Table values in the space's arithmetic (object/Fraction or float64)."""
        return self.space.asarray(self.values)

    def evaluate(self, point: PartialPoint):
        check_point(self.space, point)
        if point.support != self.space.full_mask:
            raise SupportMismatch("evaluate needs a full point")
        if self.table is not None:
            return self.table[tuple(point.values)] if self.n else self.table[()]
        return self.evaluator(np.array([point.values], dtype=np.int64))[0]

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.int64)
        if self.evaluator is not None:
            return self.evaluator(points)
        if self.n == 0:
            return np.repeat(self.values[()], len(points))
        return self.values[tuple(points.T)]

    def to_doc(self) -> Dict[str, Any]:
        if self.name in BUILTIN_NAMES:
            fn = {"kind": "builtin", "name": self.name, "params": dict(self.params)}
        elif self.boolean:
            fn = {"kind": "table", "values": [int(v) for v in self.values.reshape(-1)], "range": "boolean"}
        else:
            enc = str if self.space.exact else float
            fn = {"kind": "table", "values": [enc(v) for v in self.values.reshape(-1)], "range": "real"}
        return {"space": self.space.to_doc(), "function": fn}


def from_table(space: ProductSpace, values, boolean: bool = True, name: str = "table") -> FunctionRep:
    arr = np.asarray(values, dtype=object if not boolean else None).reshape(-1)
    if arr.size != space.outcome_count:
        raise TableLengthMismatch(
            f"Table has {arr.size} entries but the space has {space.outcome_count} outcomes"
        )
    if boolean:
        if not np.all((arr == 0) | (arr == 1)):
            bad = [v for v in arr.tolist() if v not in (0, 1)][:3]
            raise NonBooleanValue(f"Boolean-tagged table contains non-Boolean values, e.g. {bad}")
        table = arr.astype(np.int8)
    else:
        table = np.array([to_scalar(v, space.exact) for v in arr.tolist()], dtype=space.dtype)
    table = table.reshape(space.sizes)
    table.flags.writeable = False
    return FunctionRep(space, table, boolean, name, {})


# --- Builtins ---

def _profile(name: str, n: int, params: Mapping[str, Any]) -> Optional[Tuple[int, ...]]:
    ks = range(n + 1)
    if name == "const0":
        return tuple(0 for _ in ks)
    if name == "const1":
        return tuple(1 for _ in ks)
    if name == "or":
        return tuple(int(k >= 1) for k in ks)
    if name == "and":
        return tuple(int(k == n) for k in ks)
    if name == "parity":
        return tuple(k % 2 for k in ks)
    if name == "parity_even":
        return tuple(1 - k % 2 for k in ks)
    if name == "majority":
        return tuple(int(2 * k > n) for k in ks)
    if name == "threshold":
        t = int(params.get("t", (n + 1) // 2))
        return tuple(int(k >= t) for k in ks)
    return None


def _tribe_blocks(n: int, width: int) -> List[Tuple[int, ...]]:
    if width < 1:
        raise InvalidParameter(f"tribes width must be positive, got {width}")
    return [tuple(range(s, min(s + width, n))) for s in range(0, n, width)]


def _evaluator(name: str, n: int, params: Mapping[str, Any], profile) -> Evaluator:
    if profile is not None:
        prof = np.asarray(profile, dtype=np.int8)
        return lambda pts: prof[pts.sum(axis=1)]
    if name == "dictator":
        i = int(params.get("i", 0))
        if not 0 <= i < n:
            raise InvalidParameter(f"dictator coordinate {i} outside [0, {n})")
        return lambda pts: pts[:, i].astype(np.int8)
    if name == "tribes":
        blocks = _tribe_blocks(n, int(params.get("w", 2)))

        def tribes(pts):
            out = np.zeros(len(pts), dtype=bool)
            for b in blocks:
                out |= np.all(pts[:, list(b)] == 1, axis=1)
            return out.astype(np.int8)
        return tribes
    raise UnknownBuiltin(f"Unknown builtin {name!r}; known: {sorted(BUILTIN_NAMES)}")


def _hamming_weights(n: int) -> np.ndarray:
    w = np.zeros((), dtype=np.int64)
    for _ in range(n):
        w = np.add.outer(w, np.arange(2))
    return w


def builtin(name: str, space: ProductSpace, cap: Optional[int] = None, **params) -> FunctionRep:
    """
    const0, const1, dictator(i), or, and, parity (odd), parity_even, majority
    (strict), threshold(t), tribes(w). All but the constants need a binary alphabet.
    """
    name = name.replace("-", "_").lower()
    if name not in BUILTIN_NAMES:
        raise UnknownBuiltin(f"Unknown builtin {name!r}; known: {sorted(BUILTIN_NAMES)}")
    if name not in ("const0", "const1") and not space.is_binary:
        raise AlphabetNotBinary(f"Builtin {name} needs a binary alphabet on every coordinate")
    n = space.n
    profile = _profile(name, n, params) if space.is_binary else None
    if profile is None and name in ("const0", "const1"):
        c = int(name == "const1")
        evaluator = lambda pts: np.full(len(pts), c, dtype=np.int8)  # noqa: E731
    else:
        evaluator = _evaluator(name, n, params, profile)
    cap = ENUM_CAP if cap is None else cap
    table = None
    if space.outcome_count <= cap:
        if profile is not None:
            table = np.asarray(profile, dtype=np.int8)[_hamming_weights(n)]
        else:
            table = evaluator(all_points(space)).reshape(space.sizes)
        table.flags.writeable = False
    else:
        logger.info(f"Builtin {name} kept lazy: {space.outcome_count} outcomes exceed cap {cap}")
    return FunctionRep(space, table, True, name, dict(params), evaluator, profile)


def load_function(doc: Mapping[str, Any], arith: Optional[str] = None) -> FunctionRep:
    """
    Parse a JSON function spec. Accepted forms:
      {"space": <space spec>, "function": {"kind": "table", "values": [...], "range": "boolean"|"real"}}
      {"space": <space spec>, "function": {"kind": "builtin", "name": ..., "params": {...}}}
      {"builtin": name, "n": n, "p": p?, "params": {...}?}     (uniform cube unless p given)
      {"table": "0110" | [...], "p": p?}                        (binary cube, n = log2 len)
    """
    if "function" in doc:
        space = make_space(doc.get("space"), arith)
        with malformed("function spec"):
            fn = doc["function"]
            kind = fn.get("kind")
            if kind == "table":
                boolean = fn.get("range", "boolean") == "boolean"
                return from_table(space, _table_values(fn.get("values")), boolean)
            if kind == "builtin":
                return builtin(str(fn.get("name", "")), space, **(fn.get("params") or {}))
        raise InvalidParameter(f"Unknown function kind {kind!r}")
    if "builtin" in doc:
        with malformed("builtin shorthand"):
            n = int(doc.get("n", 0))
            space = make_space({"n": n, "space": {"kind": "p-biased", "p": doc.get("p", "1/2")}}, arith)
            return builtin(str(doc["builtin"]), space, **(doc.get("params") or {}))
    if "table" in doc:
        values = _table_values(doc["table"])
        n = int(round(math.log2(len(values)))) if values else 0
        if n < 1 or 2 ** n != len(values):
            raise TableLengthMismatch(f"Shorthand table of length {len(values)} is not 2^n for n >= 1")
        space = make_space({"n": n, "space": {"kind": "p-biased", "p": doc.get("p", "1/2")}}, arith)
        with malformed("table shorthand"):
            return from_table(space, values, doc.get("range", "boolean") == "boolean")
    raise InvalidParameter("Function spec needs one of 'function', 'builtin' or 'table'")


def _table_values(raw) -> List[Any]:
    if isinstance(raw, str):
        with malformed("table string"):
            return [int(c) for c in raw.strip()]
    if isinstance(raw, list):
        return raw
    raise InvalidParameter(f"Table values must be a digit string or a list, got {type(raw).__name__}")


# --- Restriction and monotonicity ---

def restrict(f: FunctionRep, mask: int, y: PartialPoint) -> FunctionRep:
    """g(x) = f(y, x) on X^{[n] \\ T}."""
    if y.support != mask:
        raise SupportMismatch(f"Partial point support {y.coords} does not match T={indices_from_mask(mask)}")
    check_point(f.space, y)
    if mask == 0:
        return f
    fixed = y.as_dict()
    rest = f.space.full_mask & ~mask
    space = f.space.subspace(rest)
    rest_coords = indices_from_mask(rest)

    table = None
    if f.table is not None:
        index = tuple(fixed[i] if i in fixed else slice(None) for i in range(f.n))
        table = np.array(f.table[index]) if f.n else f.table
        table.flags.writeable = False

    evaluator = None
    if f.evaluator is not None:
        base = f.evaluator
        n = f.n

        def evaluator(pts, base=base, n=n):
            full = np.empty((len(pts), n), dtype=np.int64)
            for i, v in fixed.items():
                full[:, i] = v
            for k, i in enumerate(rest_coords):
                full[:, i] = pts[:, k]
            return base(full)

    if table is None and evaluator is not None and space.outcome_count <= ENUM_CAP:
        table = evaluator(all_points(space)).reshape(space.sizes)
        table.flags.writeable = False

    profile = None
    if f.profile is not None and f.space.is_binary:
        shift = sum(y.values)
        profile = tuple(f.profile[shift:shift + space.n + 1])

    name = f"{f.name}|" + ",".join(f"x{i}={v}" for i, v in sorted(fixed.items()))
    return FunctionRep(space, table, f.boolean, name, {}, evaluator, profile)


def with_space(f: FunctionRep, space: ProductSpace) -> FunctionRep:
    """Same values, different measure (e.g. the same table under another bias p)."""
    if space.sizes != f.space.sizes:
        raise SupportMismatch(f"Alphabet sizes {space.sizes} differ from {f.space.sizes}")
    return replace(f, space=space)


def _require_binary(f: FunctionRep) -> None:
    if not f.space.is_binary:
        raise AlphabetNotBinary("Monotonicity is defined on binary alphabets only")


def is_increasing(f: FunctionRep) -> bool:
    """f(x) <= f(y) whenever x <= y, checked on every covering pair."""
    _require_binary(f)
    if f.profile is not None:
        return all(a <= b for a, b in zip(f.profile, f.profile[1:]))
    t = f.values
    return all(np.all(np.take(t, 0, axis=i) <= np.take(t, 1, axis=i)) for i in range(f.n))


def is_decreasing(f: FunctionRep) -> bool:
    _require_binary(f)
    if f.profile is not None:
        return all(a >= b for a, b in zip(f.profile, f.profile[1:]))
    t = f.values
    return all(np.all(np.take(t, 0, axis=i) >= np.take(t, 1, axis=i)) for i in range(f.n))


# --- Integrals ---

def binomial_weights(n: int, p, one) -> List[Any]:
    """Pr[Hamming weight = k] under mu_p^n, k = 0..n."""
    q = one - p
    return [math.comb(n, k) * p ** k * q ** (n - k) for k in range(n + 1)]


def mean(f: FunctionRep):
    """The integral of f against the product measure."""
    if f.symmetric:
        ws = binomial_weights(f.n, f.space.bias, f.space.one)
        return sum((w * v for w, v in zip(ws, f.profile)), f.space.zero)
    return table_sum(weight_grid(f.space) * f.as_array())


def conditional_mean(f: FunctionRep, mask: int, y: PartialPoint):
    """E[f | x_A = y]."""
    return mean(restrict(f, mask, y))


def l1_distance(f: FunctionRep, g: FunctionRep):
    return table_sum(weight_grid(f.space) * np.abs(f.as_array() - g.as_array()))


def l2_distance_sq(f: FunctionRep, g: FunctionRep):
    d = f.as_array() - g.as_array()
    return table_sum(weight_grid(f.space) * d * d)


def disagreement(f: FunctionRep, g: FunctionRep):
    """Pr[f != g]."""
    return table_sum(weight_grid(f.space) * np.asarray(f.values != g.values).astype(np.int8))


def marginal_table(f: FunctionRep, mask: int) -> np.ndarray:
    """int f dx_{[n]\\T} as a table over X^T, i.e. E[f | x_T = y] for every y."""
    space = f.space
    if f.symmetric:
        t = popcount(mask)
        ws = binomial_weights(f.n - t, space.bias, space.one)
        by_weight = [sum((w * f.profile[s + k] for k, w in enumerate(ws)), space.zero) for s in range(t + 1)]
        table = np.asarray(by_weight, dtype=space.dtype)[_hamming_weights(t)]
        return np.asarray(table, dtype=space.dtype)
    check_cap(space, space.full_mask)
    weights = [space.weight_array(i) for i in range(space.n)]
    return marginal_array(f.as_array(), weights, mask)
