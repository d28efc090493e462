"""Seeded instance generators.

All randomness comes from one ``random.Random(seed)`` (MT19937) per call,
so an instance is a pure function of its parameters. The parameters are
recorded in the instance's ``comment`` field.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Literal

from .model import CostModel, CostTree, Instance, InstanceError, Request

__all__ = ["GenParams", "gen_random", "gen_3decreasing", "gen_staggered_fan", "gen_batch"]

WindowStyle = Literal["tight", "loose", "staggered"]


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    n_nodes: int = 10
    n_requests: int = 10
    max_depth: int = 4
    max_fanout: int = 4
    cost_lo: int = 1
    cost_hi: int = 20
    horizon: int = 10
    window: WindowStyle = "loose"
    model: Literal["edge", "node", "3dec"] = "node"
    zero_edge_prob: float = 0.0

    def check(self) -> None:
        if self.n_nodes < 1:
            raise InstanceError("need at least one node")
        if self.n_requests < 0 or self.horizon < 0:
            raise InstanceError("request count and horizon must be non-negative")
        if self.n_nodes > 1 and (self.max_depth < 1 or self.max_fanout < 1):
            raise InstanceError("depth and fanout caps leave no room for more than one node")
        if self.cost_lo > self.cost_hi or self.cost_lo < (0 if self.model == "edge" else 1):
            raise InstanceError(f"bad cost range [{self.cost_lo}, {self.cost_hi}]")
        cap = sum(self.max_fanout**d for d in range(self.max_depth + 1))
        if self.n_nodes > cap:
            raise InstanceError(f"{self.n_nodes} nodes do not fit depth {self.max_depth} and fanout {self.max_fanout}")
        if self.window not in ("tight", "loose", "staggered"):
            raise InstanceError(f"unknown window style {self.window!r}")


def _shape(rng: random.Random, p: GenParams) -> list[int | None]:
    """Parent list for nodes 0..n-1, respecting the depth and fanout caps."""
    parents: list[int | None] = [None]
    level = [0]
    kids = [0]
    for u in range(1, p.n_nodes):
        open_ = [v for v in range(u) if level[v] < p.max_depth and kids[v] < p.max_fanout]
        v = rng.choice(open_)
        parents.append(v)
        level.append(level[v] + 1)
        kids.append(0)
        kids[v] += 1
    return parents


def _requests(rng: random.Random, p: GenParams, n: int) -> tuple[Request, ...]:
    out = []
    h = p.horizon
    for i in range(p.n_requests):
        node = rng.randrange(n)
        if p.window == "tight":
            a = rng.randint(0, h)
            d = min(h, a + rng.randint(0, 1))
        elif p.window == "loose":
            a = rng.randint(0, h // 2)
            d = rng.randint(a, h)
        else:
            a = 0
            d = rng.randint(0, h)
        out.append(Request(i, node, Fraction(a), Fraction(d)))
    return tuple(out)


def _meta(name: str, p: GenParams) -> dict:
    return {"generator": name, "prng": "MT19937 (random.Random)", "params": asdict(p)}


def gen_random(p: GenParams) -> Instance:
    """Random tree with integer costs; the model follows ``p.model``."""
    if p.model == "3dec":
        return gen_3decreasing(p)
    p.check()
    rng = random.Random(p.seed)
    parents = _shape(rng, p)
    rows = []
    if p.model == "edge":
        for u, par in enumerate(parents):
            if par is None:
                c = 0
            elif rng.random() < p.zero_edge_prob:
                c = 0
            else:
                c = rng.randint(max(1, p.cost_lo), p.cost_hi)
            rows.append((u, par, c))
        model = CostModel.EDGE
    else:
        rows = [(u, par, rng.randint(p.cost_lo, p.cost_hi)) for u, par in enumerate(parents)]
        model = CostModel.NODE
    tree = CostTree.from_nodes(rows, model)
    return Instance(tree, _requests(rng, p, p.n_nodes), _meta("gen_random", p))


def gen_3decreasing(p: GenParams) -> Instance:
    """Random node-cost tree where each child costs between 1/6 and 1/3 of its parent."""
    p.check()
    rng = random.Random(p.seed)
    parents = _shape(rng, p)
    level = [0] * len(parents)
    for u, par in enumerate(parents):
        if par is not None:
            level[u] = level[par] + 1
    depth = max(level)
    # a node at level d must cost at least 3**(depth - d) to leave room below it
    costs = [rng.randint(p.cost_lo, p.cost_hi) * 3**depth]
    for u in range(1, len(parents)):
        pc = costs[parents[u]]
        lo = max(3 ** (depth - level[u]), -(-pc // 6))
        costs.append(rng.randint(lo, pc // 3))
    tree = CostTree.from_nodes([(u, par, costs[u]) for u, par in enumerate(parents)])
    return Instance(tree, _requests(rng, p, p.n_nodes), _meta("gen_3decreasing", p))


def gen_staggered_fan(fanout: int, root_cost, child_cost, base_deadline) -> Instance:
    """Star whose k-th leaf holds one request over [0, base + k - 1]."""
    root_cost = Fraction(root_cost)
    child_cost = Fraction(child_cost)
    if fanout < 1:
        raise InstanceError("fanout must be at least 1")
    if root_cost < 3 * child_cost:
        raise InstanceError("root must cost at least three times a child")
    tree = CostTree.from_nodes([(0, None, root_cost)] + [(k, 0, child_cost) for k in range(1, fanout + 1)])
    base = Fraction(base_deadline)
    return Instance(tree, tuple(Request(k - 1, k, Fraction(0), base + k - 1) for k in range(1, fanout + 1)))


def gen_batch(count: int, seed: int, **overrides) -> list[Instance]:
    """``count`` instances cycling through node, 3-decreasing and edge models."""
    models = ("node", "3dec", "edge")
    out = []
    for i in range(count):
        kw = {"seed": seed * 1_000_003 + i, "model": models[i % 3]}
        kw.update(overrides)
        out.append(gen_random(GenParams(**kw)))
    return out
