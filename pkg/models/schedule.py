"""
The constant schedule (C, k, eps0, eps1, delta, delta0, eps2) for the
constructions. Each constant is kept as a product of rational bases raised to
integer exponents, so log2 values and bit sizes are exact even when the value
itself is astronomically small. Values are materialized only within the bit
budget; construct() refuses schedules that exceed it.

  eps0   = eps / 1000
  k      = ceil(C / eps0)
  eps1   = 3^(-10k^2) * eps0^(10k)
  delta  = 2^(-100k^2)                       (p-biased)
  delta0 = 2^(-2k)                           (general)
  delta  = 2^(-1000k^2) * eps1^10            (general)
  eps2   = delta^(10k)                       (general)
"""
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

from config import BIT_BUDGET
from utils.errors import InvalidParameter, ScheduleInfeasible
from utils.logger import logger
from utils.math_utils import fraction_log2, to_scalar

Factors = Tuple[Tuple[Fraction, int], ...]

MODES = ("pbiased", "general")
FIELDS = {
    "pbiased": ("C", "eps0", "k", "eps1", "delta"),
    "general": ("C", "eps0", "k", "eps1", "delta0", "delta", "eps2"),
}
OVERRIDABLE = ("C", "eps0", "k", "eps1", "delta", "delta0", "eps2")
FLOAT_MIN_LOG2 = -1074
LOG10_2 = math.log10(2)


@dataclass(frozen=True)
class ScheduleValue:
    name: str
    factors: Factors
    log2: float
    bits: int
    value: Optional[Fraction]
    overridden: bool = False

    @property
    def materialized(self) -> bool:
        return self.value is not None

    @property
    def printable(self) -> bool:
        """The value converts to a decimal string within the interpreter's int-to-str digit limit."""
        if self.value is None:
            return False
        limit = getattr(sys, "get_int_max_str_digits", lambda: 0)()
        longest = max(self.value.numerator.bit_length(), self.value.denominator.bit_length())
        return not limit or math.floor(longest * LOG10_2) + 1 <= limit

    def to_doc(self) -> Dict[str, Any]:
        doc = {
            "log2": self.log2,
            "bits": self.bits,
            "value": str(self.value) if self.printable else None,
            "materialized": self.materialized,
            "overridden": self.overridden,
        }
        if self.materialized and not self.printable:
            # too many digits to print; exact sizes stand in for the value
            doc["numerator_bits"] = self.value.numerator.bit_length()
            doc["denominator_bits"] = self.value.denominator.bit_length()
        return doc


def _make_value(name: str, factors: Factors, overridden: bool, budget: int) -> ScheduleValue:
    log2 = 0.0
    bits = 0
    for base, exp in factors:
        if exp:
            log2 += exp * fraction_log2(base)
            bits += abs(exp) * (base.numerator.bit_length() + base.denominator.bit_length())
    value = None
    if bits <= budget:
        value = Fraction(1)
        for base, exp in factors:
            value *= base ** exp
    if log2 < FLOAT_MIN_LOG2:
        logger.warning(f"Schedule constant {name} = 2^{log2:.6g} underflows 64-bit floats")
    return ScheduleValue(name, factors, log2, bits, value, overridden)


def _scaled(factors: Factors, by: int) -> Factors:
    return tuple((b, e * by) for b, e in factors)


@dataclass(frozen=True)
class ParameterSchedule:
    mode: str
    C: int
    epsilon: Fraction
    budget: int
    fields: Dict[str, ScheduleValue]
    overrides: Dict[str, str] = field(default_factory=dict)

    @property
    def overridden(self) -> bool:
        return bool(self.overrides)

    @property
    def k(self) -> int:
        return int(self.fields["k"].factors[0][0])

    def exact(self, name: str) -> Fraction:
        v = self.fields[name]
        if v.value is None:
            raise ScheduleInfeasible(
                f"{name} = 2^{v.log2:.6g} needs about {v.bits} bits, over the budget of {self.budget}"
            )
        return v.value

    def scalar(self, name: str, exact: bool):
        """The constant in the requested arithmetic mode."""
        value = self.exact(name)
        return value if exact else float(value)

    @property
    def infeasible_fields(self) -> List[str]:
        return [name for name, v in self.fields.items() if not v.materialized]

    @property
    def feasible(self) -> bool:
        return not self.infeasible_fields

    def require_feasible(self) -> None:
        bad = self.infeasible_fields
        if bad:
            detail = ", ".join(f"{n} (log2 {self.fields[n].log2:.6g}, {self.fields[n].bits} bits)" for n in bad)
            raise ScheduleInfeasible(
                f"Unrunnable {self.mode} schedule: {detail} exceed the exact-arithmetic budget "
                f"of {self.budget} bits; pass overrides to run at desk scale"
            )

    def to_doc(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "C": self.C,
            "epsilon": str(self.epsilon),
            "overridden": self.overridden,
            "overrides": dict(self.overrides),
            "fields": {name: v.to_doc() for name, v in self.fields.items()},
        }


def parse_overrides(items) -> Dict[str, str]:
    """["k=2", "eps1=1/10"] or a mapping -> {name: value string}."""
    if items is None:
        return {}
    if isinstance(items, Mapping):
        pairs = list(items.items())
    else:
        pairs = []
        for item in items:
            if "=" not in item:
                raise InvalidParameter(f"Override {item!r} is not of the form name=value")
            key, val = item.split("=", 1)
            pairs.append((key.strip(), val.strip()))
    out = {}
    for key, val in pairs:
        if key not in OVERRIDABLE:
            raise InvalidParameter(f"Unknown schedule field {key!r}; overridable: {list(OVERRIDABLE)}")
        out[key] = str(val)
    return out


def _positive_fraction(name: str, raw) -> Fraction:
    value = to_scalar(raw, exact=True)
    if value <= 0:
        raise InvalidParameter(f"{name} must be positive, got {raw}")
    return value


def schedule(C, epsilon, mode: str = "pbiased", overrides=None, budget: Optional[int] = None) -> ParameterSchedule:
    if mode not in MODES:
        raise InvalidParameter(f"Unknown mode {mode!r}; expected one of {MODES}")
    budget = BIT_BUDGET if budget is None else int(budget)
    overrides = parse_overrides(overrides)
    eps = to_scalar(epsilon, exact=True)
    if not 0 < eps <= 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1], got {epsilon}")

    def pick(name: str, default: Factors) -> Tuple[Factors, bool]:
        if name in overrides:
            return ((_positive_fraction(name, overrides[name]), 1),), True
        return default, False

    c_factors, c_over = pick("C", ((Fraction(int(C)), 1),))
    c_value = c_factors[0][0]
    if c_value < 1 or c_value.denominator != 1:
        raise InvalidParameter(f"C must be a positive integer, got {c_value}")
    eps0_factors, eps0_over = pick("eps0", ((eps / 1000, 1),))
    eps0 = eps0_factors[0][0]
    k_factors, k_over = pick("k", ((Fraction(math.ceil(c_value / eps0)), 1),))
    k = k_factors[0][0]
    if k.denominator != 1:
        raise InvalidParameter(f"k must be a positive integer, got {k}")
    k = int(k)

    eps1_factors, eps1_over = pick("eps1", ((Fraction(3), -10 * k * k), (eps0, 10 * k)))
    made = {
        "C": (c_factors, c_over),
        "eps0": (eps0_factors, eps0_over),
        "k": (k_factors, k_over),
        "eps1": (eps1_factors, eps1_over),
    }
    if mode == "pbiased":
        made["delta"] = pick("delta", ((Fraction(2), -100 * k * k),))
    else:
        made["delta0"] = pick("delta0", ((Fraction(2), -2 * k),))
        delta_factors, delta_over = pick("delta", ((Fraction(2), -1000 * k * k),) + _scaled(eps1_factors, 10))
        made["delta"] = (delta_factors, delta_over)
        made["eps2"] = pick("eps2", _scaled(delta_factors, 10 * k))

    fields = {name: _make_value(name, *made[name], budget=budget)
              for name in FIELDS[mode]}
    logger.info(
        f"{mode} schedule: C={c_value}, eps={eps}, k={k}, "
        + ", ".join(f"log2 {n}={v.log2:.6g}" for n, v in fields.items() if n not in ("C", "k"))
        + (f" (overrides: {overrides})" if overrides else "")
    )
    return ParameterSchedule(mode, int(c_value), eps, budget, fields, overrides)
