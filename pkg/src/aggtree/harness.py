"""Competitive-ratio reports and per-transmission OPT checks."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import Instance, fmt_q, validate_3decreasing, verify_feasible
from .oracle import OracleLimits, opt_suffix, solve_opt
from .simulator import EdgeRun, Transcript, run

__all__ = [
    "CompareRow",
    "LemmaCheck",
    "compare_instance",
    "bound_factor",
    "check_lemma",
    "partition_checks",
    "rows_to_csv",
    "rows_to_json",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ["instance_id", "n", "k", "depth", "ell", "alg_cost", "opt_cost", "ratio", "ratio_approx", "bound", "violations"]


@dataclass(frozen=True)
class CompareRow:
    instance_id: str
    n: int
    k: int
    depth: int
    ell: int
    alg_cost: Fraction
    opt_cost: Optional[Fraction]
    bound: int
    violations: int
    feasible: bool

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.opt_cost is None or self.opt_cost == 0:
            return None
        return self.alg_cost / self.opt_cost

    @property
    def within_bound(self) -> bool:
        if self.opt_cost is None:
            return True
        return self.alg_cost <= self.bound * self.opt_cost

    def as_record(self) -> dict[str, str | int]:
        ratio = self.ratio
        return {
            "instance_id": self.instance_id,
            "n": self.n,
            "k": self.k,
            "depth": self.depth,
            "ell": self.ell,
            "alg_cost": fmt_q(self.alg_cost),
            "opt_cost": "CAP-SKIPPED" if self.opt_cost is None else fmt_q(self.opt_cost),
            "ratio": "" if ratio is None else fmt_q(ratio),
            "ratio_approx": "" if ratio is None else f"{float(ratio):.4f}",
            "bound": self.bound,
            "violations": self.violations,
        }


def bound_factor(transcript: Transcript) -> int:
    """2(D+1) when the tree is already 3-decreasing, else 6(D+1)."""
    tree = transcript.instance.tree
    k = 2 if validate_3decreasing(tree) else 6
    return k * (tree.depth + 1)


def compare_instance(
    instance: Instance,
    instance_id: str = "0",
    *,
    skip_opt: bool = False,
    limits: OracleLimits = OracleLimits(),
) -> CompareRow:
    result = run(instance)
    if isinstance(result, EdgeRun):
        transcripts = result.transcripts
        # the edge optimum splits exactly across root children
        bound = max((bound_factor(t) for t in transcripts), default=2)
        depth = max((t.instance.tree.depth for t in transcripts), default=0)
    else:
        transcripts = (result,)
        bound = bound_factor(result)
        depth = instance.tree.depth
    schedule = result.to_schedule()
    feasible = verify_feasible(schedule, instance).feasible
    opt = None if skip_opt else solve_opt(instance, limits).cost
    return CompareRow(
        instance_id=instance_id,
        n=len(instance.tree),
        k=len(instance.requests),
        depth=depth,
        ell=sum(len(t.events) for t in transcripts),
        alg_cost=result.alg_cost,
        opt_cost=opt,
        bound=bound,
        violations=len(result.violations()),
        feasible=feasible,
    )


@dataclass(frozen=True)
class LemmaCheck:
    part: int
    tree_index: int
    step: int
    opt_before: Fraction
    opt_after: Fraction
    root_cost: Fraction

    @property
    def ok(self) -> bool:
        return self.opt_after <= self.opt_before - self.root_cost

    def __str__(self) -> str:
        mark = "ok" if self.ok else "FAIL"
        return (
            f"part {self.part} tree {self.tree_index} step {self.step}: "
            f"{fmt_q(self.opt_after)} <= {fmt_q(self.opt_before)} - {fmt_q(self.root_cost)}  {mark}"
        )


def _transcripts(instance: Instance) -> tuple[Transcript, ...]:
    result = run(instance)
    return result.transcripts if isinstance(result, EdgeRun) else (result,)


def check_lemma(instance: Instance, limits: OracleLimits = OracleLimits()) -> list[LemmaCheck]:
    """Each transmission of a forest tree lowers that tree's suffix OPT by its root cost."""
    out = []
    for part, tr in enumerate(_transcripts(instance)):
        for j, tree in enumerate(tr.decomposition.trees):
            n_events = len(tr.events_of(j))
            opts = [opt_suffix(tr, i, j, limits) for i in range(n_events + 1)]
            for i in range(1, n_events + 1):
                out.append(LemmaCheck(part, j, i, opts[i - 1], opts[i], tree.cost[tree.root]))
    return out


@dataclass(frozen=True)
class PartitionCheck:
    part: int
    full_opt: Fraction
    tree_opts: tuple[Fraction, ...]
    counts: tuple[int, ...]
    root_costs: tuple[Fraction, ...]

    @property
    def partition_ok(self) -> bool:
        return sum(self.tree_opts, Fraction(0)) <= self.full_opt

    @property
    def count_ok(self) -> bool:
        return all(n * c <= o for n, c, o in zip(self.counts, self.root_costs, self.tree_opts))


def partition_checks(instance: Instance, limits: OracleLimits = OracleLimits()) -> list[PartitionCheck]:
    """Forest OPTs sum to at most the full OPT; each tree's transmissions are paid for by its OPT."""
    out = []
    for part, tr in enumerate(_transcripts(instance)):
        trees = tr.decomposition.trees
        tree_opts = tuple(opt_suffix(tr, 0, j, limits) for j in range(len(trees)))
        full = solve_opt(tr.instance, limits).cost
        out.append(
            PartitionCheck(
                part,
                full,
                tree_opts,
                tuple(tr.counts),
                tuple(t.cost[t.root] for t in trees),
            )
        )
    return out


def rows_to_csv(rows: list[CompareRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def rows_to_json(rows: list[CompareRow]) -> str:
    return json.dumps([row.as_record() for row in rows], indent=1)

