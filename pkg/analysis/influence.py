"""
Influences I_f(j) = Pr[f(x) != f(x with x_j resampled)] and the total influence,
computed three ways: by definition over the finite space, from the Walsh norms
(I_f(j) = 2 sum_{S containing j} ||F_S||_2^2), and by Monte Carlo. Also the
Margulis-Russo sweep comparing 2p(1-p) d mu_p/dp with I_f over a p-grid.
"""
import asyncio
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import polars as pl
from scipy.stats import norm

from config import FLOAT_TOL, MC_SAMPLES, RUSSO_STEP
from models.boolfn import FunctionRep, binomial_weights, is_increasing, mean, with_space
from models.space import check_cap, pbiased_space, sample, weight_grid
from models.walsh import WalshExpansion, total_influence_from_norms
from utils.errors import InvalidParameter, NotIncreasing
from utils.logger import logger
from utils.math_utils import split_seeds, table_sum

METHOD_DEFINITIONAL = "exact-definitional"
METHOD_SPECTRAL = "exact-spectral"
METHOD_MC = "monte-carlo"


@dataclass(frozen=True)
class InfluenceReport:
    influences: Tuple[Any, ...]
    total: Any
    method: str
    seed: Optional[int] = None
    samples: Optional[int] = None
    standard_errors: Optional[Tuple[float, ...]] = None
    intervals: Optional[Tuple[Tuple[float, float], ...]] = None

    def to_doc(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "method": self.method,
            "influences": list(self.influences),
            "total": self.total,
        }
        if self.method == METHOD_MC:
            doc.update({
                "seed": self.seed,
                "samples": self.samples,
                "standard_errors": list(self.standard_errors),
                "intervals_95": [list(iv) for iv in self.intervals],
            })
        return doc


def _check_coordinate(f: FunctionRep, j: int) -> None:
    if not 0 <= j < f.n:
        raise InvalidParameter(f"Coordinate {j} outside [0, {f.n})")


# --- Definitional ---

def influence_exact(f: FunctionRep, j: int):
    _check_coordinate(f, j)
    space = f.space
    if f.symmetric:
        p, one = space.bias, space.one
        ws = binomial_weights(f.n - 1, p, one)
        flips = sum((w for k, w in enumerate(ws) if f.profile[k] != f.profile[k + 1]), space.zero)
        return 2 * p * (one - p) * flips

    check_cap(space, space.full_mask)
    t = np.moveaxis(f.values, j, 0)
    rest = weight_grid(space, space.full_mask & ~(1 << j))
    w = space.weights[j]
    total = space.zero
    for a in range(space.sizes[j]):
        for b in range(a + 1, space.sizes[j]):
            differ = np.asarray(t[a] != t[b]).astype(np.int8)
            total = total + 2 * w[a] * w[b] * table_sum(rest * differ)
    return total


def influences_exact(f: FunctionRep) -> InfluenceReport:
    values = tuple(influence_exact(f, j) for j in range(f.n))
    return InfluenceReport(values, sum(values, f.space.zero), METHOD_DEFINITIONAL)


def total_influence_exact(f: FunctionRep):
    if f.symmetric:
        return f.n * influence_exact(f, 0) if f.n else f.space.zero
    return influences_exact(f).total


# --- Spectral ---

def influence_spectral(e: WalshExpansion, j: int):
    """2 sum_{S containing j} ||F_S||_2^2; equals the definition for Boolean f."""
    _check_coordinate(e.base, j)
    return 2 * sum((e.l2sq(mask) for mask in e.components if mask >> j & 1), e.space.zero)


def influences_spectral(e: WalshExpansion) -> InfluenceReport:
    values = tuple(influence_spectral(e, j) for j in range(e.space.n))
    return InfluenceReport(values, total_influence_spectral(e), METHOD_SPECTRAL)


def total_influence_spectral(e: WalshExpansion):
    """2 sum_S |S| ||F_S||_2^2."""
    return total_influence_from_norms(e)


# --- Monte Carlo ---

@dataclass(frozen=True)
class McEstimate:
    value: float
    standard_error: float
    interval: Tuple[float, float]


def influence_mc(f: FunctionRep, j: int, seed: int, samples: int = MC_SAMPLES) -> McEstimate:
    """
    Draw x ~ mu and an independent y_j, count disagreements f(x) != f(x^{j <- y_j}).
    The 95% interval is the normal approximation around the sample mean.
    """
    _check_coordinate(f, j)
    x_seed, y_seed = split_seeds(seed, 2)
    space = f.space
    x = sample(space, x_seed, samples)
    probs = np.array([float(w) for w in space.weights[j]])
    y = np.random.default_rng(y_seed).choice(space.sizes[j], size=samples, p=probs / probs.sum())
    moved = x.copy()
    moved[:, j] = y
    differ = (f.evaluate_many(x) != f.evaluate_many(moved)).astype(np.float64)
    value = float(differ.mean())
    se = float(differ.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    z = norm.ppf(0.975)
    return McEstimate(value, se, (max(0.0, value - z * se), min(1.0, value + z * se)))


def influences_mc(f: FunctionRep, seed: int, samples: int = MC_SAMPLES) -> InfluenceReport:
    """Coordinate j uses child seed j of the master seed."""
    seeds = split_seeds(seed, f.n)
    estimates = [influence_mc(f, j, seeds[j], samples) for j in range(f.n)]
    total = sum(e.value for e in estimates)
    logger.info(f"Monte Carlo influences of {f.name}: total {total:.6g} from {samples} samples per coordinate")
    return InfluenceReport(
        tuple(e.value for e in estimates), total, METHOD_MC, seed, samples,
        tuple(e.standard_error for e in estimates), tuple(e.interval for e in estimates),
    )


# --- Margulis-Russo sweep ---

def rebias(f: FunctionRep, p, arith: str = "float") -> FunctionRep:
    """The same function under mu_p."""
    return with_space(f, pbiased_space(f.n, p, arith))


def russo_tolerance(n: int, p: float, step: float, outcomes: int) -> float:
    """
    Central-difference error of 2p(1-p) d mu/dp: 2p(1-p) * h^2/6 * sup|mu'''|, where
    |mu'''| <= 4 n(n-1)(n-2) for a Bernstein polynomial with coefficients in [0, 1],
    plus a float rounding term for the two means.
    """
    truncation = 2 * p * (1 - p) * step ** 2 / 6 * 4 * n * (n - 1) * (n - 2)
    rounding = 2 * p * (1 - p) * np.finfo(np.float64).eps * max(outcomes, n + 1) / step
    return truncation + rounding + FLOAT_TOL * step ** 2


def _sweep_point(f: FunctionRep, p: float, step: float) -> Dict[str, float]:
    at = rebias(f, p)
    mu = float(mean(at))
    upper = float(mean(rebias(f, p + step)))
    lower = float(mean(rebias(f, p - step)))
    lhs = 2 * p * (1 - p) * (upper - lower) / (2 * step)
    return {
        "p": p,
        "mu": mu,
        "total_influence": float(total_influence_exact(at)),
        "russo_lhs": lhs,
        "tolerance": russo_tolerance(f.n, p, step, f.space.outcome_count),
    }


def _check_grid(grid: Sequence[float], step: float) -> List[float]:
    if step <= 0:
        raise InvalidParameter(f"Finite-difference step must be positive, got {step}")
    if not grid:
        raise InvalidParameter("Empty p-grid")
    points = [float(p) for p in grid]
    for p in points:
        if not step < p < 1 - step:
            raise InvalidParameter(f"Grid point {p} with step {step} leaves (0, 1)")
    return points


async def russo_sweep_async(f: FunctionRep, grid: Sequence[float], step: float = RUSSO_STEP) -> pl.DataFrame:
    """
    One row per grid point: p, mu, total_influence, russo_lhs, residual,
    tolerance, within_tolerance. Grid points are evaluated concurrently.
    """
    if not is_increasing(f):
        raise NotIncreasing(f"{f.name} is not increasing; the Russo identity does not apply")
    points = _check_grid(grid, step)
    logger.info(f"Russo sweep of {f.name} over {len(points)} grid points with h={step}")
    rows = await asyncio.gather(*[asyncio.to_thread(_sweep_point, f, p, step) for p in points])
    df = pl.DataFrame(rows)
    return df.with_columns(
        (pl.col("russo_lhs") - pl.col("total_influence")).abs().alias("residual")
    ).with_columns(
        (pl.col("residual") <= pl.col("tolerance")).alias("within_tolerance")
    ).select(["p", "mu", "total_influence", "russo_lhs", "residual", "tolerance", "within_tolerance"])


def russo_sweep(f: FunctionRep, grid: Sequence[float], step: float = RUSSO_STEP) -> pl.DataFrame:
    return asyncio.run(russo_sweep_async(f, grid, step))
