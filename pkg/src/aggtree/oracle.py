"""Exact offline optimum for small instances.

Every request is assigned a transmission time; requests sharing a time share
one transmission whose node set is the union of their root paths. Restricting
times to request deadlines loses nothing: :func:`shift_to_deadlines` is the
exchange argument in executable form.
"""
from __future__ import annotations

import time as _time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import CostTree, Instance, Request, Schedule, Transmission, verify_feasible
from .simulator import Transcript, suffix_requests

__all__ = [
    "OracleLimits",
    "OracleRefused",
    "OptSolution",
    "candidate_times",
    "solve_opt",
    "solve_opt_with_arrivals",
    "shift_to_deadlines",
    "opt_suffix",
]


class OracleRefused(RuntimeError):
    """The instance is larger than the configured search caps."""


@dataclass(frozen=True)
class OracleLimits:
    max_requests: int = 10
    max_times: int = 8


@dataclass(frozen=True)
class OptSolution:
    cost: Fraction
    schedule: Schedule
    assignments: int
    elapsed: float


def candidate_times(requests: Iterable[Request]) -> list[Fraction]:
    return sorted({r.deadline for r in requests})


class _MaskCost:
    """Node sets as bitmasks over a fixed node order, with memoized costs."""

    def __init__(self, tree: CostTree):
        self.tree = tree
        self.bit = {u: 1 << i for i, u in enumerate(tree.nodes)}
        self.node_at = list(tree.nodes)
        self._cache: dict[int, Fraction] = {0: Fraction(0)}
        self._path: dict[int, int] = {}

    def path(self, u: int) -> int:
        m = self._path.get(u)
        if m is None:
            m = 0
            for v in self.tree.path_to_root(u):
                m |= self.bit[v]
            self._path[u] = m
        return m

    def cost(self, mask: int) -> Fraction:
        c = self._cache.get(mask)
        if c is None:
            low = mask & -mask
            c = self.cost(mask ^ low) + self.tree.cost[self.node_at[low.bit_length() - 1]]
            self._cache[mask] = c
        return c

    def nodes(self, mask: int) -> frozenset[int]:
        return frozenset(u for u, b in self.bit.items() if mask & b)


def _search(
    tree: CostTree,
    requests: Sequence[Request],
    times: Sequence[Fraction],
    limits: Optional[OracleLimits],
) -> OptSolution:
    started = _time.perf_counter()
    reqs = sorted(requests, key=lambda r: r.id)
    if limits is not None:
        if len(reqs) > limits.max_requests:
            raise OracleRefused(f"{len(reqs)} requests exceed the cap of {limits.max_requests}")
        if len(times) > limits.max_times:
            raise OracleRefused(f"{len(times)} candidate times exceed the cap of {limits.max_times}")
    if not reqs:
        return OptSolution(Fraction(0), Schedule(()), 0, _time.perf_counter() - started)

    mc = _MaskCost(tree)
    paths = [mc.path(r.node) for r in reqs]
    options = [[k for k, t in enumerate(times) if r.covers(t)] for r in reqs]
    if any(not opt for opt in options):
        raise ValueError("some request has no candidate time inside its window")

    masks = [0] * len(times)
    best_cost: Optional[Fraction] = None
    best_masks: list[int] = []
    count = 0

    def dfs(i: int, partial: Fraction) -> None:
        nonlocal best_cost, best_masks, count
        if best_cost is not None and partial >= best_cost:
            return
        if i == len(reqs):
            count += 1
            best_cost = partial
            best_masks = list(masks)
            return
        p = paths[i]
        for k in options[i]:
            old = masks[k]
            new = old | p
            masks[k] = new
            dfs(i + 1, partial + mc.cost(new) - mc.cost(old))
            masks[k] = old

    dfs(0, Fraction(0))
    assert best_cost is not None
    sched = Schedule(
        tuple(Transmission(times[k], mc.nodes(m), mc.cost(m)) for k, m in enumerate(best_masks) if m)
    )
    return OptSolution(best_cost, sched, count, _time.perf_counter() - started)


def solve_opt(instance: Instance, limits: Optional[OracleLimits] = OracleLimits()) -> OptSolution:
    """Minimum-cost feasible schedule, transmitting only at request deadlines."""
    return _search(instance.tree, instance.requests, candidate_times(instance.requests), limits)


def solve_opt_with_arrivals(instance: Instance, limits: Optional[OracleLimits] = None) -> OptSolution:
    """Same search over deadlines and arrival times; a cross-check for :func:`solve_opt`."""
    times = sorted({r.deadline for r in instance.requests} | {r.arrival for r in instance.requests})
    return _search(instance.tree, instance.requests, times, limits)


def shift_to_deadlines(schedule: Schedule, instance: Instance) -> Schedule:
    """Move each transmission to the earliest deadline among the requests it serves.

    Requests are charged to the first transmission that services them; a
    transmission only ever moves later, to a time no later than any charged
    deadline. Uncharged transmissions are dropped and same-time ones merged,
    so cost never increases.
    """
    report = verify_feasible(schedule, instance)
    if not report.feasible:
        raise ValueError(f"schedule leaves requests {report.unserviced} unserviced")
    charged: dict[int, list[Request]] = {}
    for r in instance.requests:
        charged.setdefault(report.serviced_by[r.id], []).append(r)
    merged: dict[Fraction, set[int]] = {}
    for i, tr in enumerate(schedule.transmissions):
        if i not in charged:
            continue
        t = min(r.deadline for r in charged[i])
        merged.setdefault(t, set()).update(tr.nodes)
    tree = instance.tree
    return Schedule(tuple(Transmission(t, frozenset(ns), tree.cost_of(ns)) for t, ns in merged.items()))


def opt_suffix(
    transcript: Transcript,
    i: int,
    tree_index: Optional[int] = None,
    limits: Optional[OracleLimits] = OracleLimits(),
) -> Fraction:
    """OPT of the requests left after ``i`` transmissions.

    Globally this is solved on the instance tree; per forest tree it is solved
    on that forest tree with its own requests.
    """
    rest = suffix_requests(transcript, i, tree_index)
    tree = transcript.instance.tree if tree_index is None else transcript.decomposition.trees[tree_index]
    return solve_opt(Instance(tree, tuple(sorted(rest, key=lambda r: r.id))), limits).cost
