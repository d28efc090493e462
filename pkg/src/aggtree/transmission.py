"""Budgeted transmission-tree selection on 3-decreasing trees.

:func:`select_transmission_tree` grows a rooted subtree from a budget of
twice the root cost. Each node that joins spends its budget on root paths of
the most urgent pending requests below it, then splits the budget among the
nodes it added in proportion to their costs.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import CostTree, InstanceError, Request, validate_3decreasing
from .reductions import ForestDecomposition

__all__ = [
    "VirtualTransmission",
    "ConcreteTransmission",
    "Violation",
    "select_transmission_tree",
    "expand_concrete",
    "check_transmission_invariants",
    "request_key",
]


def request_key(r: Request) -> tuple[Fraction, Fraction, int]:
    return (r.deadline, r.arrival, r.id)


@dataclass(frozen=True)
class VirtualTransmission:
    time: Fraction
    nodes: tuple[int, ...]
    budgets: Mapping[int, Fraction]
    a_sets: Mapping[int, tuple[int, ...]]
    levels: Mapping[int, int]
    serviced: tuple[int, ...]
    first_selected: Optional[int]
    cost: Fraction
    tree_index: int = 0


@dataclass(frozen=True)
class ConcreteTransmission:
    virtual: VirtualTransmission
    node_union: frozenset[int]
    union_cost: Fraction
    multiset_cost: Fraction
    source_depth: int


@dataclass(frozen=True)
class Violation:
    name: str
    node: Optional[int]
    detail: str

    def __str__(self) -> str:
        at = f" at node {self.node}" if self.node is not None else ""
        return f"{self.name}{at}: {self.detail}"


def select_transmission_tree(
    tree: CostTree,
    active: Iterable[Request],
    now: Fraction,
    tree_index: int = 0,
    *,
    check_tree: bool = True,
) -> VirtualTransmission:
    if check_tree and not validate_3decreasing(tree):
        raise InstanceError("transmission tree selection needs a 3-decreasing tree")
    pending = sorted(active, key=request_key)
    if not pending:
        raise ValueError("no active requests")
    for r in pending:
        if r.node not in tree:
            raise InstanceError(f"request {r.id} sits on node {r.node} outside the tree")

    cost = tree.cost
    root = tree.root
    parent = tree.parent
    tin, tout = tree.euler
    in_t = {root}
    order = [root]
    budgets = {root: 2 * cost[root]}
    levels = {root: 0}
    a_sets: dict[int, tuple[int, ...]] = {}
    first_selected: Optional[int] = None
    queue = deque([(root, budgets[root])])

    while queue:
        u, budget = queue.popleft()
        a_u: list[int] = []
        in_a: set[int] = set()
        a_cost = Fraction(0)
        # guard is tested before every path addition, so one path may overshoot
        while a_cost <= budget / 2:
            lo, hi = tin[u], tout[u]
            pick = next(
                (r for r in pending if lo <= tin[r.node] <= hi and r.node not in in_t and r.node not in in_a),
                None,
            )
            if pick is None:
                break
            if first_selected is None:
                first_selected = pick.id
            path = []
            v = pick.node
            while v not in in_t and v not in in_a:
                path.append(v)
                v = parent[v]
            for v in reversed(path):
                a_u.append(v)
                in_a.add(v)
                a_cost += cost[v]
        a_sets[u] = tuple(a_u)
        for v in a_u:
            share = cost[v] * budget / a_cost
            budgets[v] = share
            levels[v] = levels[u] + 1
            queue.append((v, share))
        in_t.update(a_u)
        order.extend(a_u)

    serviced = tuple(r.id for r in sorted(pending, key=lambda r: r.id) if r.node in in_t and r.covers(now))
    return VirtualTransmission(
        time=now,
        nodes=tuple(order),
        budgets=budgets,
        a_sets=a_sets,
        levels=levels,
        serviced=serviced,
        first_selected=first_selected,
        cost=tree.cost_of(order),
        tree_index=tree_index,
    )


def expand_concrete(virtual: VirtualTransmission, decomposition: ForestDecomposition) -> ConcreteTransmission:
    """Replace each virtual node by its path segment in the source tree."""
    union: set[int] = set()
    multiset_cost = Fraction(0)
    source = decomposition.source
    for u in virtual.nodes:
        try:
            b = decomposition.b_sets[u]
        except KeyError:
            raise KeyError(f"node {u} has no path segment in the decomposition") from None
        union.update(b)
        multiset_cost += sum((source.cost[v] for v in b), Fraction(0))
    return ConcreteTransmission(
        virtual=virtual,
        node_union=frozenset(union),
        union_cost=source.cost_of(union),
        multiset_cost=multiset_cost,
        source_depth=source.depth,
    )


def check_transmission_invariants(
    virtual: VirtualTransmission,
    concrete: Optional[ConcreteTransmission],
    tree: CostTree,
    source: Optional[CostTree] = None,
) -> list[Violation]:
    """Every inequality a single selection must satisfy; empty list when all hold."""
    out: list[Violation] = []
    cost = tree.cost
    root = tree.root
    croot = cost[root]
    nodes = virtual.nodes
    budgets = virtual.budgets

    if not tree.is_rooted_subtree(nodes):
        out.append(Violation("rooted connected subtree", None, f"{sorted(nodes)} is not rooted at {root}"))
    if budgets.get(root) != 2 * croot:
        out.append(Violation("root budget = 2c(r)", root, f"{budgets.get(root)} != {2 * croot}"))
    for u in nodes:
        if cost[u] > budgets[u]:
            out.append(Violation("c(u) <= budget(u)", u, f"{cost[u]} > {budgets[u]}"))
    for u, a_u in virtual.a_sets.items():
        if not a_u:
            continue
        share_sum = sum((budgets[v] for v in a_u), Fraction(0))
        if share_sum != budgets[u]:
            out.append(Violation("sum of child budgets = budget(u)", u, f"{share_sum} != {budgets[u]}"))
        a_cost = tree.cost_of(a_u)
        if 2 * a_cost > budgets[u] + cost[u]:
            out.append(Violation("c(A_u) <= (budget(u) + c(u))/2", u, f"{a_cost} > {(budgets[u] + cost[u]) / 2}"))
        if any(not tree.in_subtree(v, u) or v == u for v in a_u):
            out.append(Violation("A_u below u", u, f"{a_u}"))

    per_level: dict[int, Fraction] = {}
    for u in nodes:
        per_level[virtual.levels[u]] = per_level.get(virtual.levels[u], Fraction(0)) + budgets[u]
    for lvl, total in sorted(per_level.items()):
        if total > 2 * croot:
            out.append(Violation("level budget <= 2c(r)", None, f"level {lvl} sums to {total} > {2 * croot}"))
    if max(per_level) > tree.depth:
        out.append(Violation("max level <= D", None, f"{max(per_level)} > {tree.depth}"))

    bound = 2 * (tree.depth + 1) * croot
    if virtual.cost > bound:
        out.append(Violation("c(T) <= 2(D+1)c(r)", root, f"{virtual.cost} > {bound}"))
    if virtual.cost != tree.cost_of(nodes):
        out.append(Violation("c(T) = sum of node costs", None, f"{virtual.cost} != {tree.cost_of(nodes)}"))
    if not virtual.serviced:
        out.append(Violation("progress", None, "no request serviced"))
    elif virtual.first_selected is not None and virtual.first_selected not in virtual.serviced:
        out.append(Violation("progress", None, f"first selected request {virtual.first_selected} not serviced"))

    if concrete is not None:
        if concrete.union_cost > concrete.multiset_cost:
            out.append(Violation("c(union B_u) <= sum c(B_u)", None, f"{concrete.union_cost} > {concrete.multiset_cost}"))
        gbound = 6 * (concrete.source_depth + 1) * croot
        if concrete.multiset_cost > gbound:
            out.append(Violation("sum c(B_u) <= 6(D+1)c(r)", root, f"{concrete.multiset_cost} > {gbound}"))
        if source is not None and not source.is_rooted_subtree(concrete.node_union):
            out.append(Violation("concrete tree rooted and connected", None, f"{sorted(concrete.node_union)}"))
    return out
