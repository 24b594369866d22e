"""Command-line front end.

Exit codes: 0 ok, 1 input error, 2 verification or reproduction failure,
3 search budget exceeded, 4 simulator dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import TARGETS, build_target, expected
from .construct import LCProblem, build_plan, verify_plan
from .errors import (
    BlockTooWide,
    BudgetExceeded,
    DimensionMismatch,
    FieldError,
    InvalidProblem,
    KTooLarge,
    LCQMACError,
    RankDeficientV,
    RedundantBlock,
    StateTooLarge,
)
from .matf import MatF
from .qsim import DEFAULT_MAX_DIM, PlanSimulator
from .schema import (
    SCHEMA_VERSION,
    MalformedFile,
    dumps,
    plan_from_dict,
    plan_to_dict,
    problem_from_dict,
    problem_to_dict,
    rate_dict,
)
from .search import DEFAULT_BUDGET, STRATEGIES, brute_force_c, cost_region, min_aux_qudits, objective_c, rate_of

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_BUDGET, EXIT_CAP = 0, 1, 2, 3, 4

_ASSUMPTION = {
    RankDeficientV: "the K requested combinations must be linearly independent (rank V = K)",
    RedundantBlock: "each server block must have full column rank (rank V_s = m_s)",
    BlockTooWide: "each server block must satisfy m_s <= K",
    KTooLarge: "K must not exceed the total number of streams (K <= sum m_s)",
}


class CLIError(Exception):
    def __init__(self, code: int, payload: dict):
        super().__init__(payload.get("error", ""))
        self.code = code
        self.payload = payload


def _load_problem(path: str) -> LCProblem:
    try:
        return problem_from_dict(path)
    except InvalidProblem as exc:
        raise CLIError(
            EXIT_INPUT,
            {"error": str(exc), "violated_assumption": _ASSUMPTION.get(type(exc), ""), "kind": type(exc).__name__},
        ) from exc
    except (MalformedFile, FieldError, DimensionMismatch, ValueError) as exc:
        raise CLIError(EXIT_INPUT, {"error": str(exc), "kind": type(exc).__name__}) from exc


def _load_plan(path: str):
    try:
        return plan_from_dict(path)
    except (LCQMACError, MalformedFile, ValueError) as exc:
        raise CLIError(EXIT_INPUT, {"error": str(exc), "kind": type(exc).__name__}) from exc


def _emit(data: dict, out: str | None) -> None:
    text = dumps(data)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _search(problem: LCProblem, strategy: str, seed: int, budget: int):
    if strategy == "exhaustive":
        # An explicit exhaustive request has no fallback.
        try:
            brute_force_c(problem, budget)
        except BudgetExceeded as exc:
            raise CLIError(
                EXIT_BUDGET,
                {"error": str(exc), "candidates": exc.candidates, "budget": exc.budget},
            ) from exc
    return min_aux_qudits(problem, strategy, seed, budget)


def analyze_report(problem: LCProblem, strategy="portfolio", seed=0, budget=DEFAULT_BUDGET, alloc=None) -> dict:
    outcome = _search(problem, strategy, seed, budget)
    rate = rate_of(problem, outcome.c_best)
    region = cost_region(problem, outcome.c_best)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "report",
        "tool_version": __version__,
        "problem": problem_to_dict(problem),
        "search": outcome.as_dict(),
        "c": outcome.c_best,
        "c_status": "optimal" if outcome.proven_optimal else "upper_bound",
        "rate": rate_dict(rate),
        "rate_status": "optimal for this scheme" if outcome.proven_optimal else "achievable (possibly improvable)",
        "region": region.as_dict(),
        "seed": seed,
    }
    if alloc is not None:
        plan = build_plan(problem, outcome.precoders, alloc)
        report["plan"] = plan_to_dict(plan)
        report["cost_point"] = [{"num": v.numerator, "den": v.denominator} for v in region.corner(plan.allocation)]
    return report


def cmd_analyze(args) -> int:
    problem = _load_problem(args.problem)
    alloc = args.alloc if args.plan else None
    _emit(analyze_report(problem, args.strategy, args.seed, args.budget, alloc), args.out)
    return EXIT_OK


def _build(problem: LCProblem, args):
    outcome = _search(problem, args.strategy, args.seed, args.budget)
    try:
        return build_plan(problem, outcome.precoders, args.alloc)
    except ValueError as exc:
        raise CLIError(EXIT_INPUT, {"error": str(exc), "kind": "AllocationError"}) from exc


def cmd_construct(args) -> int:
    plan = _build(_load_problem(args.problem), args)
    _emit(plan_to_dict(plan), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    plan = _load_plan(args.plan)
    failures = verify_plan(plan, trials=args.trials, seed=args.seed)
    _emit({"ok": not failures, "failures": failures}, args.out)
    return EXIT_OK if not failures else EXIT_VERIFY


def _load_data(path: str, m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    try:
        data = json.loads(Path(path).read_text())
        items = data["instances"] if isinstance(data, dict) and "instances" in data else data
        if isinstance(items, dict):
            items = [items]
        pairs = [(np.array(it["W1"], dtype=np.int64), np.array(it["W2"], dtype=np.int64)) for it in items]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_INPUT, {"error": f"cannot read data file: {exc}"}) from exc
    for W1, W2 in pairs:
        if W1.shape != (m,) or W2.shape != (m,):
            raise CLIError(EXIT_INPUT, {"error": f"data vectors must have length m={m}"})
    return pairs


def simulate_plan(plan, trials: int, seed: int, max_dim: int, data=None) -> dict:
    sim = PlanSimulator(plan, max_dim)
    rng = np.random.default_rng(seed)
    m, d = plan.problem.m, plan.field.d
    if data is None:
        data = [(rng.integers(0, d, size=m), rng.integers(0, d, size=m)) for _ in range(trials)]
    results = []
    min_mod = 1.0
    for t, (W1, W2) in enumerate(data):
        Y1, Y2, mod = sim.run(W1, W2)
        E1, E2 = plan.expected_output(W1, W2)
        min_mod = min(min_mod, mod)
        results.append({"trial": t, "pass": bool(np.array_equal(Y1, E1) and np.array_equal(Y2, E2))})
    passes = sum(r["pass"] for r in results)
    return {
        "trials": len(results),
        "passes": passes,
        "failures": len(results) - passes,
        "min_expectation_modulus": round(min_mod, 12),
        "qudits": plan.so.N,
        "state_dim": d**plan.so.N,
        "per_trial": results,
    }


def cmd_simulate(args) -> int:
    plan = _load_plan(args.plan)
    failures = verify_plan(plan, trials=10)
    if failures:
        _emit({"ok": False, "error": "plan failed verification", "failures": failures}, args.out)
        return EXIT_VERIFY
    data = _load_data(args.data, plan.problem.m) if args.data else None
    try:
        summary = simulate_plan(plan, args.trials, args.seed, args.max_dim, data)
    except StateTooLarge as exc:
        raise CLIError(EXIT_CAP, {"error": str(exc), "required_max_dim": exc.required, "max_dim": exc.cap}) from exc
    _emit(summary, args.out)
    return EXIT_OK if summary["failures"] == 0 else EXIT_VERIFY


def reproduce_report(target: str, S=None, d=None, seed=0, budget=DEFAULT_BUDGET, trials=20, max_dim=DEFAULT_MAX_DIM):
    problem = build_target(target, S, d)
    d = problem.field.d
    want = expected(target, problem.S if target != "example1" else None, d)
    report = analyze_report(problem, "portfolio", seed, budget)
    plan = build_plan(problem, [MatF(problem.field, P) for P in report["search"]["precoders"]])
    checks = [
        {"name": "c", "expected": want["c"], "actual": plan.c},
        {"name": "rate", "expected": rate_dict(want["rate"]), "actual": rate_dict(plan.rate)},
    ]
    if want.get("proven_optimal"):
        checks.append({"name": "proven_optimal", "expected": True, "actual": report["search"]["proven_optimal"]})
    if "identity_c" in want:
        checks.append(
            {"name": "identity_c", "expected": want["identity_c"], "actual": objective_c(problem, problem.identity_precoders())}
        )
    failures = verify_plan(plan)
    checks.append({"name": "verify", "expected": [], "actual": failures})
    if problem.field.d ** plan.so.N <= max_dim:
        sim = simulate_plan(plan, trials, seed, max_dim)
        checks.append({"name": "simulate_failures", "expected": 0, "actual": sim["failures"]})
    else:
        report["simulation"] = f"skipped: state dimension {d ** plan.so.N} exceeds max_dim {max_dim}"
    for chk in checks:
        chk["pass"] = chk["expected"] == chk["actual"]
    report["target"] = {"name": target, "S": problem.S, "d": d}
    report["plan"] = plan_to_dict(plan)
    report["checks"] = checks
    report["ok"] = all(chk["pass"] for chk in checks)
    return report


def cmd_reproduce(args) -> int:
    try:
        report = reproduce_report(args.target, args.S, args.d, args.seed, args.budget, args.trials, args.max_dim)
    except (ValueError, FieldError, InvalidProblem) as exc:
        raise CLIError(EXIT_INPUT, {"error": str(exc)}) from exc
    _emit(report, args.out)
    for chk in report["checks"]:
        print(f"{'PASS' if chk['pass'] else 'FAIL'} {args.target} {chk['name']}", file=sys.stderr)
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=STRATEGIES, default="portfolio")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max candidate precoder tuples to score")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcqmac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="minimise auxiliary qudits and report rate and cost region")
    p.add_argument("problem")
    _add_search_flags(p)
    p.add_argument("--plan", action="store_true", help="embed the encoding plan in the report")
    p.add_argument("--alloc", default="balanced")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", help="emit an encoding plan with a self-orthogonal transfer matrix")
    p.add_argument("problem")
    _add_search_flags(p)
    p.add_argument("--alloc", default="balanced", help="balanced | server=K | comma-separated counts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check a plan file")
    p.add_argument("plan")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run a plan on the qudit state-vector simulator")
    p.add_argument("plan")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data", help="JSON file with W1/W2 instances instead of random data")
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="rebuild a worked example and compare with its published constants")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--S", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        sys.stdout.write(dumps(exc.payload))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
