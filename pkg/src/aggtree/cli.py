"""Command-line entry point: ``aggtree {run,opt,compare,check-lemma,gen,validate}``.

Exit codes: 0 success, 2 parse or validation error, 3 invariant violation or
infeasible transcript, 4 ratio bound or OPT-decrease violation, 5 oracle caps
exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .generators import GenParams, gen_random
from .harness import check_lemma, compare_instance, rows_to_csv, rows_to_json
from .model import CostModel, InstanceError, dump_instance, fmt_q, load_instance, validate_3decreasing, verify_feasible
from .oracle import OracleLimits, OracleRefused, solve_opt
from .simulator import run

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_BOUND, EXIT_CAPS = 0, 2, 3, 4, 5


def _limits(args) -> OracleLimits:
    return OracleLimits(args.max_opt_requests, args.max_opt_times)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_run(args) -> int:
    instance = load_instance(args.instance)
    result = run(instance)
    _emit(result.to_json(trace=args.trace), args.out)
    report = verify_feasible(result.to_schedule(), instance)
    if not report.feasible:
        print(f"infeasible: requests {report.unserviced} unserviced", file=sys.stderr)
        return EXIT_INVARIANT
    bad = result.violations()
    if bad:
        print(f"invariant violation in event {bad[0][0]}: {bad[0][1]}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_opt(args) -> int:
    instance = load_instance(args.instance)
    sol = solve_opt(instance, _limits(args))
    doc = {
        "cost": fmt_q(sol.cost),
        "transmissions": [
            {"time": fmt_q(t.time), "nodes": sorted(t.nodes), "cost": fmt_q(t.cost)} for t in sol.schedule.transmissions
        ],
        "assignments_enumerated": sol.assignments,
    }
    _emit(json.dumps(doc, indent=1), args.out)
    return EXIT_OK


def _compare_inputs(args):
    if args.instances:
        for path in args.instances:
            yield Path(path).stem, load_instance(path)
    else:
        for i in range(args.count):
            p = GenParams(
                seed=args.seed * 1_000_003 + i,
                n_nodes=args.nodes,
                n_requests=args.requests,
                horizon=args.horizon,
                model=("node", "3dec", "edge")[i % 3] if args.model == "mixed" else args.model,
            )
            yield f"{i:04d}", gen_random(p)


def cmd_compare(args) -> int:
    rows = [
        compare_instance(inst, name, skip_opt=args.skip_opt, limits=_limits(args))
        for name, inst in _compare_inputs(args)
    ]
    rows.sort(key=lambda r: r.instance_id)
    _emit(rows_to_csv(rows).rstrip("\n") if args.format == "csv" else rows_to_json(rows), args.out)
    if any(not r.feasible or r.violations for r in rows):
        return EXIT_INVARIANT
    if any(not r.within_bound for r in rows):
        bad = next(r for r in rows if not r.within_bound)
        print(f"ratio bound violated on {bad.instance_id}: {bad.alg_cost} > {bad.bound} * {bad.opt_cost}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_check_lemma(args) -> int:
    checks = check_lemma(load_instance(args.instance), _limits(args))
    for c in checks:
        print(c)
    return EXIT_OK if all(c.ok for c in checks) else EXIT_BOUND


def cmd_gen(args) -> int:
    p = GenParams(
        seed=args.seed,
        n_nodes=args.nodes,
        n_requests=args.requests,
        max_depth=args.max_depth,
        max_fanout=args.max_fanout,
        cost_lo=args.cost_lo,
        cost_hi=args.cost_hi,
        horizon=args.horizon,
        window=args.window,
        model=args.model,
    )
    _emit(dump_instance(gen_random(p)), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    tree = instance.tree
    info = {
        "cost_model": tree.model.value,
        "nodes": len(tree),
        "requests": len(instance.requests),
        "depth": tree.depth,
    }
    if tree.model is CostModel.NODE:
        info["three_decreasing"] = validate_3decreasing(tree)
    print(json.dumps(info))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aggtree", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def oracle_flags(p):
        p.add_argument("--max-opt-requests", type=int, default=10)
        p.add_argument("--max-opt-times", type=int, default=8)

    p = sub.add_parser("run", help="simulate the online algorithm and write a transcript")
    p.add_argument("instance")
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true", help="include budgets and A-sets per event")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("opt", help="exact offline optimum (small instances only)")
    p.add_argument("instance")
    p.add_argument("--out")
    oracle_flags(p)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("compare", help="ALG vs OPT report")
    p.add_argument("instances", nargs="*")
    p.add_argument("--count", type=int, default=100, help="generated instances when no files are given")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--requests", type=int, default=5)
    p.add_argument("--horizon", type=int, default=4)
    p.add_argument("--model", choices=["node", "3dec", "edge", "mixed"], default="mixed")
    p.add_argument("--skip-opt", action="store_true")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    oracle_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check-lemma", help="verify OPT drops by the root cost per transmission")
    p.add_argument("instance")
    oracle_flags(p)
    p.set_defaults(func=cmd_check_lemma)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--requests", type=int, default=10)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-fanout", type=int, default=4)
    p.add_argument("--cost-lo", type=int, default=1)
    p.add_argument("--cost-hi", type=int, default=20)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--window", choices=["tight", "loose", "staggered"], default="loose")
    p.add_argument("--model", choices=["node", "3dec", "edge"], default="node")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="parse an instance and print a summary")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OracleRefused as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_CAPS


if __name__ == "__main__":
    sys.exit(main())
