"""Event-driven online run over the forest decomposition."""
from __future__ import annotations

import json
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional

from .model import (
    CostModel,
    Instance,
    InstanceError,
    Request,
    Schedule,
    Transmission,
    fmt_q,
)
from .reductions import ForestDecomposition, Normalization, decompose_forest, map_back, normalize
from .transmission import (
    ConcreteTransmission,
    VirtualTransmission,
    Violation,
    check_transmission_invariants,
    expand_concrete,
    select_transmission_tree,
)

__all__ = ["SimulationError", "Event", "Transcript", "EdgeRun", "run_online", "run_online_edge", "suffix_requests"]


def _dumps(obj: Any, pad: str = "") -> str:
    """JSON with one line per event; the C encoder only runs without ``indent``."""
    inner = pad + " "
    if isinstance(obj, dict) and ("events" in obj or "parts" in obj):
        items = [f"{inner}{json.dumps(k)}: {_dumps(v, inner)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list) and obj and all(isinstance(x, dict) for x in obj):
        return "[\n" + ",\n".join(inner + _dumps(x, inner) for x in obj) + "\n" + pad + "]"
    return json.dumps(obj)


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Event:
    time: Fraction
    tree_index: int
    virtual: VirtualTransmission
    concrete: ConcreteTransmission

    @property
    def serviced(self) -> tuple[int, ...]:
        return self.virtual.serviced


@dataclass(frozen=True)
class Transcript:
    instance: Instance
    decomposition: ForestDecomposition
    events: tuple[Event, ...]

    @property
    def alg_cost(self) -> Fraction:
        return sum((e.concrete.union_cost for e in self.events), Fraction(0))

    @property
    def counts(self) -> list[int]:
        out = [0] * len(self.decomposition.trees)
        for e in self.events:
            out[e.tree_index] += 1
        return out

    def events_of(self, tree_index: int) -> list[Event]:
        return [e for e in self.events if e.tree_index == tree_index]

    def to_schedule(self) -> Schedule:
        return Schedule(
            tuple(Transmission(e.time, e.concrete.node_union, e.concrete.union_cost) for e in self.events)
        )

    def violations(self) -> list[tuple[int, Violation]]:
        trees = self.decomposition.trees
        out = []
        for i, e in enumerate(self.events):
            for v in check_transmission_invariants(e.virtual, e.concrete, trees[e.tree_index], self.decomposition.source):
                out.append((i, v))
        return out

    def to_dict(self, trace: bool = False) -> dict[str, Any]:
        events = []
        for e in self.events:
            row: dict[str, Any] = {
                "time": fmt_q(e.time),
                "tree": e.tree_index,
                "nodes": sorted(e.concrete.node_union),
                "cost": fmt_q(e.concrete.union_cost),
                "serviced": list(e.serviced),
            }
            if trace:
                v = e.virtual
                row["virtual"] = {
                    "nodes": list(v.nodes),
                    "budgets": {str(u): fmt_q(b) for u, b in v.budgets.items()},
                    "a_sets": {str(u): list(a) for u, a in v.a_sets.items() if a},
                    "levels": {str(u): lv for u, lv in v.levels.items()},
                    "cost": fmt_q(v.cost),
                    "multiset_cost": fmt_q(e.concrete.multiset_cost),
                }
            events.append(row)
        return {
            "cost_model": self.instance.model.value,
            "forest_trees": len(self.decomposition.trees),
            "events": events,
            "transmissions_per_tree": self.counts,
            "alg_cost": fmt_q(self.alg_cost),
        }

    def to_json(self, trace: bool = False) -> str:
        return _dumps(self.to_dict(trace))


def run_online(instance: Instance, *, check: bool = False) -> Transcript:
    """Simulate the online algorithm on a positive node-cost instance.

    At each event time arrivals are applied first; then, tree by tree in
    index order, a transmission is selected while some active request in that
    tree has its deadline exactly now. With ``check=True`` every transmission
    is audited and the first invariant violation raises.
    """
    if instance.model is not CostModel.NODE:
        raise InstanceError("run_online expects a node-cost instance; use run_online_edge")
    decomp = decompose_forest(instance.tree, instance.requests)
    arrivals: dict[Fraction, list[Request]] = defaultdict(list)
    for r in instance.requests:
        arrivals[r.arrival].append(r)
    # only trees holding a request that matures at t can transmit at t
    due: dict[Fraction, set[int]] = defaultdict(set)
    for r in instance.requests:
        due[r.deadline].add(decomp.tree_of[r.node])
    times = sorted(arrivals.keys() | due.keys())
    active: list[list[Request]] = [[] for _ in decomp.trees]
    events: list[Event] = []

    for t in times:
        for r in sorted(arrivals.get(t, ()), key=lambda r: r.id):
            active[decomp.tree_of[r.node]].append(r)
        for j in sorted(due.get(t, ())):
            tree = decomp.trees[j]
            while any(r.deadline == t for r in active[j]):
                virtual = select_transmission_tree(tree, active[j], t, j, check_tree=False)
                concrete = expand_concrete(virtual, decomp)
                if check:
                    bad = check_transmission_invariants(virtual, concrete, tree, decomp.source)
                    if bad:
                        raise SimulationError(f"invariant violated at t={t} in tree {j}: {bad[0]}")
                done = set(virtual.serviced)
                if not done:
                    raise SimulationError(f"transmission at t={t} in tree {j} serviced nothing")
                events.append(Event(t, j, virtual, concrete))
                active[j] = [r for r in active[j] if r.id not in done]
        for j in due.get(t, ()):
            late = [r.id for r in active[j] if r.deadline <= t]
            if late:
                raise SimulationError(f"requests {late} missed their deadline at t={t}")
    return Transcript(instance, decomp, tuple(events))


def suffix_requests(transcript: Transcript, i: int, tree_index: Optional[int] = None) -> frozenset[Request]:
    """Requests not serviced by the first ``i`` transmissions, arrived or not.

    With ``tree_index`` the count and the request set are both restricted to
    that forest tree.
    """
    events: Sequence[Event] = (
        transcript.events if tree_index is None else transcript.events_of(tree_index)
    )
    if not 0 <= i <= len(events):
        raise IndexError(f"transmission index {i} outside 0..{len(events)}")
    done = {rid for e in events[:i] for rid in e.serviced}
    decomp = transcript.decomposition
    return frozenset(
        r
        for r in transcript.instance.requests
        if r.id not in done and (tree_index is None or decomp.tree_of[r.node] == tree_index)
    )


@dataclass(frozen=True)
class EdgeRun:
    """Online run on an edge-cost instance, one transcript per normalized part."""

    normalization: Normalization
    transcripts: tuple[Transcript, ...]

    @property
    def instance(self) -> Instance:
        return self.normalization.original

    @property
    def alg_cost(self) -> Fraction:
        return sum((t.alg_cost for t in self.transcripts), Fraction(0))

    def to_schedule(self) -> Schedule:
        """Transmissions in the original tree; free sends of the absorbed root cover dropped requests."""
        tree = self.instance.tree
        out = []
        for norm, tr in zip(self.normalization.parts, self.transcripts):
            for e in tr.events:
                nodes = map_back(e.concrete.node_union, norm)
                out.append(Transmission(e.time, nodes, tree.cost_of(nodes)))
        for t in sorted({r.deadline for r in self.normalization.dropped_requests}):
            out.append(Transmission(t, self.normalization.absorbed, Fraction(0)))
        return Schedule(tuple(out))

    def violations(self) -> list[tuple[int, Violation]]:
        return [(k, v) for k, tr in enumerate(self.transcripts) for _, v in tr.violations()]

    def to_dict(self, trace: bool = False) -> dict[str, Any]:
        sched = self.to_schedule()
        return {
            "cost_model": "edge",
            "parts": [t.to_dict(trace) for t in self.transcripts],
            "dropped_requests": [r.id for r in self.normalization.dropped_requests],
            "transmissions": [
                {"time": fmt_q(tr.time), "nodes": sorted(tr.nodes), "cost": fmt_q(tr.cost)}
                for tr in sched.transmissions
            ],
            "alg_cost": fmt_q(self.alg_cost),
        }

    def to_json(self, trace: bool = False) -> str:
        return _dumps(self.to_dict(trace))


def run_online_edge(instance: Instance, *, check: bool = False) -> EdgeRun:
    norm = normalize(instance)
    return EdgeRun(norm, tuple(run_online(p.node_instance, check=check) for p in norm.parts))


def run(instance: Instance, *, check: bool = False) -> Transcript | EdgeRun:
    """Dispatch on the cost model."""
    if instance.model is CostModel.EDGE:
        return run_online_edge(instance, check=check)
    return run_online(instance, check=check)
