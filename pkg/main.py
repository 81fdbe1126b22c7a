import argparse
import asyncio
import math
import sys
import time
from typing import Any, Dict, List, Optional

from analysis.constructor import construct, run_checks
from analysis.influence import (
    influences_exact,
    influences_mc,
    influences_spectral,
    russo_sweep_async,
    total_influence_exact,
)
from analysis.monotone import boost_bruteforce_async, boost_via_atoms
from analysis.verify import SUITES, run_verify_async
from config import DEFAULT_SEED, ENUM_CAP, MC_SAMPLES, RUSSO_STEP
from data.builtin_provider import BuiltinProvider
from data.json_provider import JsonProvider
from data.provider_base import SpecProvider
from models.boolfn import l2_distance_sq, mean
from models.pseudojunta import (
    atoms,
    check_prop_direct,
    conditional_expectation,
    cost,
    cost_mc,
    junta_collection,
    or_example_collection,
)
from models.schedule import schedule
from models.walsh import parseval_report, pbiased_coefficients, walsh_expand
from utils.errors import InvalidParameter, PseudoJuntaError, malformed
from utils.logger import LEVELS, logger, set_level
from utils.math_utils import indices_from_mask, to_scalar
from utils.reporting import build_report, dumps, write_csv, write_report, write_text

DEFAULT_GRID = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
COLLECTION_BUILTINS = ("or-example", "junta", "empty")


def _parse_params(items: Optional[List[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in items or []:
        if "=" not in item:
            raise InvalidParameter(f"Parameter {item!r} is not of the form name=value")
        key, val = item.split("=", 1)
        params[key.strip()] = int(val) if val.strip().lstrip("-").isdigit() else val.strip()
    return params


def _coords(args) -> List[int]:
    with malformed("--coords"):
        return [int(c) for c in (args.coords or "").split(",") if c.strip()]


def _collection_doc(args) -> Optional[Dict[str, Any]]:
    name = getattr(args, "collection", None)
    if not name:
        return None
    doc: Dict[str, Any] = {"builtin": name}
    if name == "junta":
        doc["A"] = _coords(args)
    if name == "or-example":
        doc["max_size"] = args.max_arity
    return doc


def _provider(args) -> SpecProvider:
    if args.input:
        return JsonProvider(args.input)
    if args.builtin:
        if args.n is None:
            raise InvalidParameter("--builtin needs --n")
        return BuiltinProvider(args.builtin, args.n, args.p, _parse_params(args.param), _collection_doc(args))
    raise InvalidParameter("Provide an input document with --in or a builtin with --builtin/--n")


async def _collection(provider: SpecProvider, space, args):
    J = await provider.get_collection(space)
    if J is None and getattr(args, "collection", None):
        if args.collection == "junta":
            J = junta_collection(space, _coords(args))
        else:
            J = or_example_collection(space, args.max_arity)
    if J is None:
        raise InvalidParameter("This command needs a collection: a 'collection' key in the input or --collection")
    return J


# --- Commands ---

async def cmd_decompose(args, provider: SpecProvider) -> Dict[str, Any]:
    f = await provider.get_function(args.arith)
    e = await asyncio.to_thread(walsh_expand, f)
    basis = None
    if f.space.bias is not None:
        basis = await asyncio.to_thread(pbiased_coefficients, f)
    components = []
    for mask in sorted(e.components, key=lambda m: (bin(m).count("1"), indices_from_mask(m))):
        item = {
            "S": list(indices_from_mask(mask)),
            "l2sq": e.l2sq(mask),
            "linf": e.linf(mask),
            "table": e.component(mask).reshape(-1).tolist(),
        }
        if basis is not None:
            item["coefficient"] = basis.coefficients[mask]
            item["coefficient_squared"] = basis.squared_coefficients[mask]
        components.append(item)
    parseval = parseval_report(e)
    return {
        "function": f.name,
        "n": f.n,
        "components": components,
        "parseval": {"lhs": parseval.lhs, "rhs": parseval.rhs, "residual": parseval.residual, "ok": parseval.ok},
    }


async def cmd_influence(args, provider: SpecProvider) -> Dict[str, Any]:
    f = await provider.get_function(args.arith)
    method = args.method
    if method == "auto":
        method = "mc" if f.is_lazy and not f.symmetric else "exact"
    if method == "exact":
        report = await asyncio.to_thread(influences_exact, f)
    elif method == "spectral":
        report = await asyncio.to_thread(lambda: influences_spectral(walsh_expand(f)))
    else:
        report = await asyncio.to_thread(influences_mc, f, args.seed, args.samples)
    return {"function": f.name, "n": f.n, "mean": mean(f) if not f.is_lazy or f.symmetric else None,
            **report.to_doc()}


async def cmd_pseudojunta(args, provider: SpecProvider) -> Dict[str, Any]:
    f = await provider.get_function(args.arith)
    J = await _collection(provider, f.space, args)
    out: Dict[str, Any] = {"action": args.action, "collection": J.to_doc(), "max_arity": J.max_arity}
    if args.action == "cost":
        if f.space.outcome_count > ENUM_CAP:
            est, se = await asyncio.to_thread(cost_mc, J, args.seed, args.samples)
            out.update(cost=est, standard_error=se, method="monte-carlo")
        else:
            out.update(cost=await asyncio.to_thread(cost, J), method="exact")
    elif args.action == "atoms":
        partition = await asyncio.to_thread(atoms, J)
        out.update(atom_count=len(partition.atoms), atoms=[a.to_doc() for a in partition.atoms],
                   total_mass=partition.total_mass)
    elif args.action == "condexp":
        ce = await asyncio.to_thread(conditional_expectation, f, J)
        out.update(values=ce.values.reshape(-1).tolist(), l2_error=l2_distance_sq(f, ce))
    else:
        result = await asyncio.to_thread(check_prop_direct, J, f)
        out.update(influence=result.influence, twice_cost=result.twice_cost, passed=result.passed)
    return out


async def cmd_construct(args, provider: SpecProvider) -> Dict[str, Any]:
    f = await provider.get_function(args.arith)
    if args.schedule_only:
        C = max(1, math.ceil(total_influence_exact(f)))
        return {"schedule": schedule(C, args.epsilon, args.mode, args.override, args.budget).to_doc()}
    result = await asyncio.to_thread(construct, f, args.epsilon, args.mode, args.override, args.budget)
    out = dict(result.report)
    out["h"] = result.h.values.reshape(-1).tolist()
    if args.checks:
        out["checks"] = await asyncio.to_thread(run_checks, f, result)
    return out


async def cmd_boost(args, provider: SpecProvider) -> Dict[str, Any]:
    f = await provider.get_function(args.arith)
    if args.method == "brute":
        found = await boost_bruteforce_async(f, args.epsilon, args.max_size)
    else:
        J = await _collection(provider, f.space, args)
        found = await asyncio.to_thread(boost_via_atoms, f, J, args.epsilon)
    if found is None:
        return {"found": False, "method": "brute-force", "epsilon": to_scalar(args.epsilon, f.space.exact),
                "max_size": args.max_size}
    return found.to_doc()


def _examples_doc(args) -> Dict[str, Any]:
    if args.name in COLLECTION_BUILTINS:
        doc: Dict[str, Any] = {
            "space": {"n": args.n, "space": {"kind": "p-biased", "p": args.p}},
            "function": {"kind": "builtin", "name": "or", "params": {}},
            "collection": {"builtin": args.name},
        }
        if args.name == "junta":
            doc["collection"]["A"] = _coords(args)
        if args.name == "or-example":
            doc["collection"]["max_size"] = args.max_arity
        return doc
    return {
        "space": {"n": args.n, "space": {"kind": "p-biased", "p": args.p}},
        "function": {"kind": "builtin", "name": args.name, "params": _parse_params(args.param)},
    }


# --- Parser ---

def _add_input(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--in", dest="input", help="JSON input document (- for stdin)")
    sub.add_argument("--builtin", help="Builtin function name instead of --in")
    sub.add_argument("--n", type=int, help="Coordinate count for --builtin")
    sub.add_argument("--p", default="1/2", help="Bias for --builtin (rational or float)")
    sub.add_argument("--param", action="append", help="Builtin parameter name=value (repeatable)")
    sub.add_argument("--arith", choices=["exact", "float"], help="Arithmetic mode (default: exact within the cap)")
    sub.add_argument("--out", help="Output file (default stdout)")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Master seed")


def _add_collection(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--collection", choices=list(COLLECTION_BUILTINS), help="Builtin collection")
    sub.add_argument("--coords", help="Comma-separated coordinates for --collection junta")
    sub.add_argument("--max-arity", type=int, default=1, help="Largest |S| for --collection or-example")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pjlab", description="Boolean function analysis and pseudo-junta constructions")
    parser.add_argument("--log-level", type=str.upper, choices=list(LEVELS), help="Override PJLAB_LOG_LEVEL")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("decompose", help="Generalized Walsh expansion")
    _add_input(p)

    p = subs.add_parser("influence", help="Coordinate and total influences")
    _add_input(p)
    p.add_argument("--method", choices=["auto", "exact", "spectral", "mc"], default="auto")
    p.add_argument("--samples", type=int, default=MC_SAMPLES)

    p = subs.add_parser("sweep", help="Margulis-Russo sweep over a p-grid (CSV)")
    _add_input(p)
    p.add_argument("--grid", default=DEFAULT_GRID, help="Comma-separated p values")
    p.add_argument("--step", type=float, default=RUSSO_STEP, help="Central-difference step h")

    p = subs.add_parser("pseudojunta", help="Collection cost, atoms, conditional expectation, measurability check")
    p.add_argument("action", choices=["cost", "atoms", "condexp", "check"])
    _add_input(p)
    _add_collection(p)
    p.add_argument("--samples", type=int, default=MC_SAMPLES)

    p = subs.add_parser("construct", help="Build a pseudo-junta approximation h of f")
    _add_input(p)
    p.add_argument("--epsilon", default="1/10")
    p.add_argument("--mode", choices=["pbiased", "general"], default="pbiased")
    p.add_argument("--override", action="append", help="Schedule override name=value (repeatable)")
    p.add_argument("--budget", type=int, help="Exact-arithmetic bit budget")
    p.add_argument("--checks", action="store_true", help="Also run the invariant checkers")
    p.add_argument("--schedule-only", action="store_true", help="Report the schedule without running")

    p = subs.add_parser("boost", help="Find S with E[f | x_S = 1...1] >= 1 - epsilon")
    _add_input(p)
    _add_collection(p)
    p.add_argument("--epsilon", default="1/10")
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--method", choices=["brute", "atoms"], default="brute")

    p = subs.add_parser("verify", help="Run invariant suites")
    p.add_argument("--suite", action="append", help=f"Suite name or all; one of {['all', *SUITES]}")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="Output file (default stdout)")

    p = subs.add_parser("examples", help="Emit an input document for a builtin function or collection")
    p.add_argument("name")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", default="1/2")
    p.add_argument("--param", action="append")
    p.add_argument("--coords", help="Comma-separated coordinates for the junta collection")
    p.add_argument("--max-arity", type=int, default=1, help="Largest |S| for the or-example collection")
    p.add_argument("--out", help="Output file (default stdout)")
    return parser


def _inputs(args, document: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    skip = {"out", "input"}
    return {"document": document, "args": {k: v for k, v in sorted(vars(args).items()) if k not in skip}}


COMMANDS = {
    "decompose": cmd_decompose,
    "influence": cmd_influence,
    "pseudojunta": cmd_pseudojunta,
    "construct": cmd_construct,
    "boost": cmd_boost,
}


async def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    started = time.perf_counter()

    if args.command == "examples":
        write_text(dumps(_examples_doc(args)), args.out)
        return 0

    if args.command == "verify":
        results = await run_verify_async(args.suite or ["all"], args.n, args.trials, args.seed)
        passed = all(r.passed for r in results)
        outputs = {"passed": passed, "suites": {r.name: r.to_doc() for r in results}}
        report = build_report("verify", _inputs(args, None), outputs, seeds={"master": args.seed},
                              wall_time=time.perf_counter() - started)
        write_report(report, args.out)
        return 0 if passed else 1

    provider = _provider(args)
    logger.info(f"Running {args.command} on {provider.source}")
    document = await provider.get_document()

    if args.command == "sweep":
        f = await provider.get_function(args.arith)
        grid = [float(to_scalar(g, exact=False)) for g in args.grid.split(",") if g.strip()]
        df = await russo_sweep_async(f, grid, args.step)
        write_csv(df, args.out)
        return 0

    outputs = await COMMANDS[args.command](args, provider)
    seeds = {"master": args.seed} if args.command in ("influence", "pseudojunta") else None
    sched = outputs.pop("schedule", None) if args.command == "construct" else None
    report = build_report(args.command, _inputs(args, document), outputs, seeds=seeds, schedule=sched,
                          wall_time=time.perf_counter() - started)
    write_report(report, args.out)
    return 0


def run(argv: Optional[List[str]] = None) -> int:
    """Exit code: 0 success, 1 domain error or failing verify, 2 usage error (from argparse)."""
    try:
        return asyncio.run(main(argv))
    except PseudoJuntaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(run())
