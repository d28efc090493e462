"""Domain types for multi-level aggregation instances.

Costs and times are :class:`fractions.Fraction` throughout. A tree carries one
cost per node; under the edge model a node's cost is the cost of the edge to
its parent and the root's cost is zero, so ``cost_of(nodes)`` is the
transmission cost under either model.
"""
from __future__ import annotations

import enum
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Optional

__all__ = [
    "CostModel",
    "CostTree",
    "Request",
    "Instance",
    "Transmission",
    "Schedule",
    "FeasibilityReport",
    "InstanceError",
    "InstanceParseError",
    "StructuralError",
    "parse_instance",
    "dump_instance",
    "load_instance",
    "parse_schedule",
    "dump_schedule",
    "validate_3decreasing",
    "verify_feasible",
    "to_fraction",
    "fmt_q",
]


class InstanceError(ValueError):
    """Semantic problem with an instance (bad tree, bad cost, bad request)."""


class InstanceParseError(InstanceError):
    def __init__(self, msg: str, line: Optional[int] = None, col: Optional[int] = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.col = col


class StructuralError(ValueError):
    """A transmission is not a rooted connected subtree, or its cost is wrong."""


class CostModel(str, enum.Enum):
    EDGE = "edge"
    NODE = "node"


def to_fraction(value: Any) -> Fraction:
    """Exact rational from an int or a ``"p/q"`` / decimal string.

    Floats are refused: they are rarely the value the author meant.
    """
    if isinstance(value, bool):
        raise InstanceError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"not a rational: {value!r}") from exc
    raise InstanceError(f"not a rational: {value!r} (use an int or a string)")


def fmt_q(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True, eq=False)
class CostTree:
    """Rooted tree with per-node costs.

    ``parent`` and ``cost`` are keyed by node id and keep insertion order,
    which is the canonical node order used for all deterministic iteration.
    """

    parent: Mapping[int, Optional[int]]
    cost: Mapping[int, Fraction]
    model: CostModel = CostModel.NODE

    @classmethod
    def from_nodes(
        cls,
        nodes: Iterable[tuple[int, Optional[int], Any]],
        model: CostModel | str = CostModel.NODE,
    ) -> "CostTree":
        model = CostModel(model)
        parent: dict[int, Optional[int]] = {}
        cost: dict[int, Fraction] = {}
        for nid, par, c in nodes:
            if isinstance(nid, bool) or not isinstance(nid, int):
                raise InstanceError(f"node id must be an integer, got {nid!r}")
            if nid in parent:
                raise InstanceError(f"duplicate node id {nid}")
            parent[nid] = par
            cost[nid] = Fraction(0) if (c is None and par is None and model is CostModel.EDGE) else to_fraction(c)
        tree = cls(parent, cost, model)
        tree._validate()
        return tree

    def _validate(self) -> None:
        roots = [u for u, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise InstanceError(f"not a tree: expected exactly one root, found {len(roots)}")
        for u, p in self.parent.items():
            if p is not None and p not in self.parent:
                raise InstanceError(f"node {u} has missing parent {p}")
        # every node must reach the root without revisiting
        for u in self.parent:
            seen = set()
            v: Optional[int] = u
            while v is not None:
                if v in seen:
                    raise InstanceError(f"not a tree: parent cycle through node {v}")
                seen.add(v)
                v = self.parent[v]
        for u, c in self.cost.items():
            if self.model is CostModel.NODE and c <= 0:
                raise InstanceError(f"node {u} has non-positive cost {c}")
            if self.model is CostModel.EDGE:
                if c < 0:
                    raise InstanceError(f"edge into node {u} has negative cost {c}")
                if self.parent[u] is None and c != 0:
                    raise InstanceError("edge-model root must have cost 0")

    # -- derived structure -------------------------------------------------

    @cached_property
    def root(self) -> int:
        return next(u for u, p in self.parent.items() if p is None)

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        kids: dict[int, list[int]] = {u: [] for u in self.parent}
        for u, p in self.parent.items():
            if p is not None:
                kids[p].append(u)
        return {u: tuple(k) for u, k in kids.items()}

    @cached_property
    def level(self) -> dict[int, int]:
        out = {self.root: 0}
        for u in self.preorder:
            for v in self.children[u]:
                out[v] = out[u] + 1
        return out

    @cached_property
    def depth(self) -> int:
        return max(self.level.values())

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        order: list[int] = []
        stack = [self.root]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(reversed(self.children[u]))
        return tuple(order)

    @cached_property
    def euler(self) -> tuple[dict[int, int], dict[int, int]]:
        """Preorder entry index and last descendant index per node."""
        tin: dict[int, int] = {}
        tout: dict[int, int] = {}
        for i, u in enumerate(self.preorder):
            tin[u] = i
        for u in reversed(self.preorder):
            kids = self.children[u]
            tout[u] = max((tout[v] for v in kids), default=tin[u])
        return tin, tout

    def in_subtree(self, v: int, u: int) -> bool:
        """True iff ``v`` lies in the subtree rooted at ``u``."""
        tin, tout = self.euler
        return tin[u] <= tin[v] <= tout[u]

    def path_to_root(self, u: int) -> list[int]:
        path = []
        v: Optional[int] = u
        while v is not None:
            path.append(v)
            v = self.parent[v]
        return path

    def __contains__(self, u: object) -> bool:
        return u in self.parent

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(self.parent)

    def cost_of(self, nodes: Iterable[int]) -> Fraction:
        return sum((self.cost[u] for u in set(nodes)), Fraction(0))

    def is_rooted_subtree(self, nodes: Iterable[int]) -> bool:
        s = set(nodes)
        if self.root not in s:
            return False
        return all(u in self.parent and (u == self.root or self.parent[u] in s) for u in s)

    def edges_of(self, nodes: Iterable[int]) -> frozenset[tuple[int, int]]:
        return frozenset((self.parent[u], u) for u in nodes if self.parent[u] is not None)

    def to_rows(self) -> list[tuple[int, Optional[int], Fraction]]:
        return [(u, self.parent[u], self.cost[u]) for u in self.parent]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostTree):
            return NotImplemented
        return self.model is other.model and self.to_rows() == other.to_rows()

    def __hash__(self) -> int:
        return hash((self.model, tuple(self.to_rows())))

    def __repr__(self) -> str:
        return f"CostTree({self.model.value}, n={len(self)}, root={self.root}, depth={self.depth})"


@dataclass(frozen=True, order=True)
class Request:
    id: int
    node: int
    arrival: Fraction
    deadline: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "arrival", to_fraction(self.arrival))
        object.__setattr__(self, "deadline", to_fraction(self.deadline))
        if self.arrival > self.deadline:
            raise InstanceError(f"request {self.id}: arrival {self.arrival} after deadline {self.deadline}")

    def covers(self, t: Fraction) -> bool:
        return self.arrival <= t <= self.deadline


@dataclass(frozen=True)
class Instance:
    tree: CostTree
    requests: tuple[Request, ...] = ()
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "requests", tuple(self.requests))
        seen = set()
        for r in self.requests:
            if r.id in seen:
                raise InstanceError(f"duplicate request id {r.id}")
            seen.add(r.id)
            if r.node not in self.tree:
                raise InstanceError(f"request {r.id} references unknown node {r.node}")

    @property
    def model(self) -> CostModel:
        return self.tree.model

    def with_requests(self, requests: Iterable[Request]) -> "Instance":
        return Instance(self.tree, tuple(requests), self.meta)


@dataclass(frozen=True)
class Transmission:
    time: Fraction
    nodes: frozenset[int]
    cost: Fraction


@dataclass(frozen=True)
class Schedule:
    transmissions: tuple[Transmission, ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.transmissions, key=lambda tr: tr.time))
        object.__setattr__(self, "transmissions", ordered)

    @property
    def total_cost(self) -> Fraction:
        return sum((tr.cost for tr in self.transmissions), Fraction(0))

    def __len__(self) -> int:
        return len(self.transmissions)


@dataclass(frozen=True)
class FeasibilityReport:
    serviced_by: Mapping[int, Optional[int]]

    @property
    def feasible(self) -> bool:
        return all(i is not None for i in self.serviced_by.values())

    @property
    def unserviced(self) -> list[int]:
        return [rid for rid, i in self.serviced_by.items() if i is None]


def validate_3decreasing(tree: CostTree) -> bool:
    """True iff every non-root node costs at most a third of its parent."""
    if tree.model is not CostModel.NODE:
        raise InstanceError("3-decreasing is defined for node-cost trees only")
    return all(3 * tree.cost[u] <= tree.cost[p] for u, p in tree.parent.items() if p is not None)


def verify_feasible(schedule: Schedule, instance: Instance) -> FeasibilityReport:
    """Map every request to the first transmission servicing it.

    Raises :class:`StructuralError` if a transmission is not a rooted
    connected subtree or misstates its cost.
    """
    tree = instance.tree
    for i, tr in enumerate(schedule.transmissions):
        unknown = [u for u in tr.nodes if u not in tree]
        if unknown:
            raise StructuralError(f"transmission {i} has unknown nodes {sorted(unknown)}")
        if not tree.is_rooted_subtree(tr.nodes):
            raise StructuralError(f"transmission {i} at t={tr.time} is not a rooted connected subtree")
        if tree.cost_of(tr.nodes) != tr.cost:
            raise StructuralError(f"transmission {i} states cost {tr.cost}, nodes cost {tree.cost_of(tr.nodes)}")
    serviced: dict[int, Optional[int]] = {}
    for r in instance.requests:
        serviced[r.id] = next(
            (i for i, tr in enumerate(schedule.transmissions) if r.node in tr.nodes and r.covers(tr.time)),
            None,
        )
    return FeasibilityReport(serviced)


# -- file format -------------------------------------------------------------


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(exc.msg, exc.lineno, exc.colno) from exc


def parse_instance(text: str) -> Instance:
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise InstanceParseError("instance must be a JSON object")
    try:
        model = CostModel(doc.get("cost_model", "node"))
    except ValueError as exc:
        raise InstanceParseError(f"unknown cost_model {doc.get('cost_model')!r}") from exc
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise InstanceParseError("'nodes' must be a non-empty list")
    rows = []
    for k, nd in enumerate(nodes):
        if not isinstance(nd, dict) or "id" not in nd:
            raise InstanceParseError(f"nodes[{k}] must be an object with an 'id'")
        rows.append((nd["id"], nd.get("parent"), nd.get("cost")))
    tree = CostTree.from_nodes(rows, model)
    requests = []
    for k, rq in enumerate(doc.get("requests", [])):
        if not isinstance(rq, dict):
            raise InstanceParseError(f"requests[{k}] must be an object")
        try:
            requests.append(Request(rq["id"], rq["node"], to_fraction(rq["arrival"]), to_fraction(rq["deadline"])))
        except KeyError as exc:
            raise InstanceParseError(f"requests[{k}] missing field {exc}") from exc
    meta = doc.get("comment", {})
    return Instance(tree, tuple(requests), meta if isinstance(meta, dict) else {"text": meta})


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    tree = instance.tree
    doc: dict[str, Any] = {"cost_model": tree.model.value}
    if instance.meta:
        doc["comment"] = dict(instance.meta)
    doc["nodes"] = [{"id": u, "parent": p, "cost": fmt_q(c)} for u, p, c in tree.to_rows()]
    doc["requests"] = [
        {"id": r.id, "node": r.node, "arrival": fmt_q(r.arrival), "deadline": fmt_q(r.deadline)}
        for r in instance.requests
    ]
    return doc


def dump_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def schedule_to_list(schedule: Schedule) -> list[dict[str, Any]]:
    return [
        {"time": fmt_q(tr.time), "nodes": sorted(tr.nodes), "cost": fmt_q(tr.cost)}
        for tr in schedule.transmissions
    ]


def dump_schedule(schedule: Schedule) -> str:
    return json.dumps({"transmissions": schedule_to_list(schedule), "total_cost": fmt_q(schedule.total_cost)})


def parse_schedule(text: str) -> Schedule:
    doc = _load_json(text)
    rows: Sequence[Any] = doc["transmissions"] if isinstance(doc, dict) else doc
    return Schedule(
        tuple(Transmission(to_fraction(t["time"]), frozenset(t["nodes"]), to_fraction(t["cost"])) for t in rows)
    )
