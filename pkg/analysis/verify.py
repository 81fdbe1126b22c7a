"""
Invariant suites behind the `verify` command. Each suite runs a number of seeded
trials (trial t draws from child seed t of the master seed) and counts, per
invariant, how many checks passed.
"""
import asyncio
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from analysis.constructor import check_smoothing, construct, run_checks
from analysis.influence import influences_exact, influences_spectral, russo_sweep
from analysis.monotone import (
    boost_bruteforce,
    boost_via_atoms,
    conditionals_nondecreasing,
    fkg_check,
)
from analysis.random_instances import (
    dominating_collection,
    random_boolean,
    random_collection,
    random_decreasing,
    random_increasing,
    random_measurable,
    random_space,
)
from models.boolfn import builtin, conditional_mean, disagreement, mean
from models.pseudojunta import (
    atoms,
    check_prop_direct,
    conditional_expectation,
    cost,
    is_measurable,
    junta_collection,
    junta_distance,
    or_example_collection,
)
from models.schedule import schedule
from models.space import PartialPoint, pbiased_space, weight_grid
from models.walsh import (
    expand_array,
    infinity_bound_holds,
    inner_product,
    marginal_identity_holds,
    mean_zero_residual,
    parseval_report,
    walsh_expand,
)
from utils.errors import InvalidParameter, NoQualifyingAtom, ScheduleInfeasible
from utils.logger import logger
from utils.math_utils import indices_from_mask, masks_up_to, split_seeds, table_max_abs, table_sum

RUSSO_GRID = tuple(i / 10 for i in range(1, 10))
RUSSO_BOUND = 1e-5


@dataclass
class SuiteResult:
    name: str
    counts: Dict[str, List[int]] = field(default_factory=dict)

    def record(self, invariant: str, ok: bool) -> None:
        passed, total = self.counts.setdefault(invariant, [0, 0])
        self.counts[invariant] = [passed + int(bool(ok)), total + 1]

    @property
    def passed(self) -> bool:
        return all(p == t for p, t in self.counts.values())

    def to_doc(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "invariants": {k: {"passed": p, "total": t} for k, (p, t) in sorted(self.counts.items())},
        }


def _trials(seed: int, trials: int):
    for child in split_seeds(seed, trials):
        yield np.random.default_rng(child)


# --- Suites ---

def suite_parseval(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("parseval")
    for rng in _trials(seed, trials):
        f = random_boolean(random_space(rng, n), rng)
        e = walsh_expand(f)
        result.record("parseval", parseval_report(e).ok)
        result.record("mean_zero", mean_zero_residual(e) == 0)
        result.record("infinity_bound", infinity_bound_holds(e))
        result.record("marginal_identity", marginal_identity_holds(e))
        again = expand_array(f.space, e.reconstruct().as_array())
        result.record("uniqueness", all(np.array_equal(again.component(s), e.component(s)) for s in e.components))
    return result


def suite_orthogonality(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("orthogonality")
    for rng in _trials(seed, trials):
        e = walsh_expand(random_boolean(random_space(rng, n), rng))
        masks = e.masks
        ok = all(inner_product(e, a, b) == 0 for i, a in enumerate(masks) for b in masks[i + 1:])
        result.record("orthogonality", ok)
    return result


def suite_influence(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("influence")
    for rng in _trials(seed, trials):
        f = random_boolean(random_space(rng, n), rng)
        exact = influences_exact(f)
        spectral = influences_spectral(walsh_expand(f))
        result.record("definitional_equals_spectral", exact.influences == spectral.influences)
        result.record("totals_match", exact.total == spectral.total)
    return result


def suite_stability(n: int, trials: int, seed: int) -> SuiteResult:
    """|I_f(j) - I_g(j)| <= 2 Pr[f != g] for every j."""
    result = SuiteResult("stability")
    for rng in _trials(seed, trials):
        space = random_space(rng, n)
        f, g = random_boolean(space, rng), random_boolean(space, rng)
        bound = 2 * disagreement(f, g)
        inf_f, inf_g = influences_exact(f), influences_exact(g)
        result.record("stability", all(abs(a - b) <= bound for a, b in zip(inf_f.influences, inf_g.influences)))
    return result


def suite_prop_direct(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("prop-direct")
    for rng in _trials(seed, trials):
        space = random_space(rng, n)
        J = random_collection(space, rng, max_arity=min(2, n))
        h = random_measurable(J, rng)
        result.record("prop_direct", check_prop_direct(J, h).passed)

        f = random_boolean(space, rng)
        ce = conditional_expectation(f, J)
        result.record("tower", mean(ce) == mean(f))
        w = weight_grid(space)
        result.record("contraction", table_sum(w * ce.as_array() ** 2) <= table_sum(w * f.as_array() ** 2))
        result.record("finer_collection_keeps_measurability", is_measurable(h, dominating_collection(J, rng)))
    return result


def suite_russo(n: int, trials: int, seed: int) -> SuiteResult:
    """OR and majority on 3 to max(5, min(n, 7)) coordinates over a nine-point p-grid."""
    result = SuiteResult("russo")
    top = max(5, min(n, 7))
    for size in range(3, top + 1):
        space = pbiased_space(size, "1/2", "float")
        for name in ("or", "majority"):
            df = russo_sweep(builtin(name, space), RUSSO_GRID)
            result.record("within_tolerance", bool(df["within_tolerance"].all()))
            result.record("residual_below_1e-5", float(df["residual"].max()) <= RUSSO_BOUND)
    return result


def suite_constructor(n: int, trials: int, seed: int) -> SuiteResult:
    """p-biased constructions at desk-scale overrides, with an independent L1 recomputation."""
    result = SuiteResult("constructor")
    for rng in _trials(seed, trials):
        space = random_space(rng, n)
        f = random_boolean(space, rng)
        run = construct(f, "1/10", "pbiased", {"k": str(n), "eps1": "1/20", "delta": "1/100"})
        for name, ok in run_checks(f, run).items():
            result.record(name, ok)
        h = run.h
        pointwise = sum(
            (w * abs(int(a) - int(b)) for w, a, b in
             zip(weight_grid(space).reshape(-1), f.values.reshape(-1), h.values.reshape(-1))),
            space.zero,
        )
        result.record("l1_recomputed", pointwise == run.report["l1_error"])
        result.record("h_measurable", is_measurable(h, run.collection, run.state.partition))
    return result


def _rare_symbol_instance(result: SuiteResult) -> None:
    """
    Dictator on a coordinate with Pr[1] = 1/300 < delta^2 at delta = 2^(-4k), k = 1:
    psi_S keeps only the rare symbol, so F_S psi_S has a nonzero residue to bound.
    """
    f = builtin("dictator", pbiased_space(2, "1/300", "exact"), i=0)
    run = construct(f, "1/10", "general", {"k": "1", "eps0": "1/100", "eps1": "1/4", "delta": "1/16"})
    state = run.state
    result.record("psi_nonconstant", any(len(np.unique(t)) > 1 for t in state.psi.values()))
    result.record("residue_nonzero", any(table_max_abs(arr) > 0
                                         for m in state.modified.values() for arr in m.residues.values()))
    result.record("smoothing", check_smoothing(state))


def suite_lemmas(n: int, trials: int, seed: int) -> SuiteResult:
    """
    General-mode constructions with schedule-consistent constants at k = 1 and k = 2,
    plus one instance with an enlarged delta where the smoothing bound is not vacuous.
    """
    result = SuiteResult("lemmas")
    size = min(n, 3)
    for t, rng in enumerate(_trials(seed, trials)):
        k = 1 + t % 2
        f = random_boolean(random_space(rng, size), rng)
        run = construct(f, "1/10", "general", {"k": str(k), "eps1": "1/4"})
        for name, ok in run_checks(f, run).items():
            result.record(name, ok)
    _rare_symbol_instance(result)
    return result


def suite_boost(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("boost")
    eps = Fraction(1, 4)
    for rng in _trials(seed, trials):
        space = random_space(rng, n)
        f = random_increasing(space, rng)
        found = boost_bruteforce(f, eps, n)
        result.record("bruteforce_found", found is not None and found.value >= 1 - eps)
        result.record("conditionals_nondecreasing", conditionals_nondecreasing(f))
        via_point = boost_via_atoms(f, junta_collection(space, range(n)), eps)
        result.record("atoms_measured", via_point.value >= 1 - eps)
        try:
            via_random = boost_via_atoms(f, random_collection(space, rng, max_arity=min(2, n)), eps)
            result.record("atoms_measured", via_random.value >= 1 - eps)
        except NoQualifyingAtom:
            pass
    return result


def suite_fkg(n: int, trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("fkg")
    for rng in _trials(seed, trials):
        space = random_space(rng, n)
        result.record("fkg", fkg_check(random_increasing(space, rng), random_decreasing(space, rng)).passed)
    return result


def _or_examples(result: SuiteResult) -> None:
    for size in range(4, 17):
        p = Fraction(1, size)
        f = builtin("or", pbiased_space(size, p, "exact"))
        report = influences_exact(f)
        each = 2 * p * (1 - p) ** size
        result.record("or_influence_formula", all(v == each for v in report.influences))
        result.record("or_influence_le_2p", each <= 2 * p)
        result.record("or_total_le_2", report.total <= 2)
    f16 = builtin("or", pbiased_space(16, Fraction(1, 16), "exact"))
    closest = min(junta_distance(f16, indices_from_mask(m)) for m in masks_up_to(16, 2))
    result.record("or_no_close_2_junta", closest >= Fraction(1, 4))

    for size in range(4, 9):
        space = pbiased_space(size, Fraction(1, size), "exact")
        J = or_example_collection(space)
        result.record("or_collection_cost_1", cost(J) == 1)
        result.record("or_collection_discrete", len(atoms(J).atoms) == space.outcome_count)


def _parity_examples(result: SuiteResult) -> None:
    f = builtin("parity", pbiased_space(20, Fraction(1, 20), "exact"))
    result.record("parity_total_le_2", influences_exact(f).total <= 2)
    low, high = 1 / (2 * math.e), 1 - 1 / (2 * math.e)
    inside = True
    boosted = False
    for mask in masks_up_to(20, 2):
        size = len(indices_from_mask(mask))
        for values in np.ndindex(*(2,) * size):
            value = conditional_mean(f, mask, PartialPoint(mask, tuple(int(v) for v in values)))
            inside = inside and low <= value <= high
            boosted = boosted or (all(values) and value >= high)
    result.record("parity_conditionals_in_interval", inside)
    result.record("parity_no_boosting_restriction", not boosted)


def _boost_examples(result: SuiteResult) -> None:
    for size in range(1, 11):
        for p in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
            found = boost_bruteforce(builtin("or", pbiased_space(size, p, "exact")), 0, size)
            result.record("or_singleton", found is not None and found.size == 1)
    half = pbiased_space(6, "1/2", "exact")
    for f in (builtin("majority", pbiased_space(5, "1/2", "exact")), builtin("tribes", half, w=2)):
        found = boost_bruteforce(f, Fraction(1, 10), f.n)
        result.record("increasing_builtin_boosted", found is not None and found.value >= Fraction(9, 10))


def _schedule_refusal(result: SuiteResult) -> None:
    s = schedule(1, "1/10", "pbiased")
    result.record("schedule_k", s.k == 10 ** 4)
    result.record("schedule_log2_delta", s.fields["delta"].log2 == -100 * s.k ** 2)
    try:
        construct(builtin("dictator", pbiased_space(3, "1/2", "exact"), i=0), "1/10", "pbiased")
        result.record("construct_refused", False)
    except ScheduleInfeasible:
        result.record("construct_refused", True)


def suite_examples(n: int, trials: int, seed: int) -> SuiteResult:
    """Closed-form claims about the OR, parity and majority examples, and the schedule refusal."""
    result = SuiteResult("examples")
    _or_examples(result)
    _parity_examples(result)
    _boost_examples(result)
    _schedule_refusal(result)
    return result


SUITES: Dict[str, Callable[[int, int, int], SuiteResult]] = {
    "parseval": suite_parseval,
    "orthogonality": suite_orthogonality,
    "influence": suite_influence,
    "stability": suite_stability,
    "prop-direct": suite_prop_direct,
    "russo": suite_russo,
    "constructor": suite_constructor,
    "lemmas": suite_lemmas,
    "boost": suite_boost,
    "fkg": suite_fkg,
    "examples": suite_examples,
}


def resolve_suites(names: Sequence[str]) -> List[str]:
    chosen: List[str] = []
    for name in names:
        if name == "all":
            chosen.extend(SUITES)
        elif name in SUITES:
            chosen.append(name)
        else:
            raise InvalidParameter(f"Unknown suite {name!r}; expected one of {['all', *SUITES]}")
    return list(dict.fromkeys(chosen))


def run_suite(name: str, n: int = 3, trials: int = 100, seed: int = 0) -> SuiteResult:
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    if trials < 1:
        raise InvalidParameter(f"trials must be positive, got {trials}")
    result = SUITES[name](n, trials, seed)
    summary = ", ".join(f"{k} {p}/{t}" for k, (p, t) in sorted(result.counts.items()))
    log = logger.info if result.passed else logger.error
    log(f"Suite {name}: {summary}")
    return result


async def run_verify_async(names: Sequence[str], n: int = 3, trials: int = 100, seed: int = 0) -> List[SuiteResult]:
    """Suites run concurrently, one worker thread each; results keep the requested order."""
    chosen = resolve_suites(names)
    return list(await asyncio.gather(*[asyncio.to_thread(run_suite, s, n, trials, seed) for s in chosen]))


def run_verify(names: Sequence[str], n: int = 3, trials: int = 100, seed: int = 0) -> List[SuiteResult]:
    return asyncio.run(run_verify_async(names, n, trials, seed))
