"""Instance normalization and the 3-decreasing forest decomposition.

Edge-cost instances are reduced to positive node-cost instances in three
steps: zero-cost edges hanging off the root are contracted into the root,
the tree is split into one instance per remaining root child, and each part
has its edge costs pushed down onto the child endpoint. Zero-cost nodes that
remain are merged into their nearest positive ancestor. Requests that end up
on the root are free and are set aside.
"""
from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import CostModel, CostTree, Instance, InstanceError, Request

__all__ = [
    "DegenerateInstanceError",
    "RootSplit",
    "NormalizedInstance",
    "Normalization",
    "ForestDecomposition",
    "split_at_root",
    "edge_to_node",
    "normalize",
    "decompose_forest",
    "map_back",
]


class DegenerateInstanceError(InstanceError):
    pass


class RootSplit(NamedTuple):
    parts: list[Instance]
    dropped: tuple[Request, ...]


@dataclass(frozen=True)
class NormalizedInstance:
    """A positive node-cost instance plus the way back to the edge tree."""

    node_instance: Instance
    original: Instance
    # normalized node -> original nodes it stands for (survivor first)
    provenance: Mapping[int, tuple[int, ...]]
    # original non-root node (i.e. the edge into it) -> normalized node carrying its cost
    edge_carrier: Mapping[int, int]
    # original nodes between the normalized root and the original root, root included
    attachment: tuple[int, ...]
    dropped_requests: tuple[Request, ...] = ()

    @property
    def tree(self) -> CostTree:
        return self.node_instance.tree


@dataclass(frozen=True)
class Normalization:
    original: Instance
    parts: tuple[NormalizedInstance, ...]
    dropped_requests: tuple[Request, ...]
    # the root plus every node reached from it over zero-cost edges only
    absorbed: frozenset[int] = frozenset()


def split_at_root(instance: Instance) -> RootSplit:
    """One sub-instance per child of the root; root requests are dropped."""
    tree = instance.tree
    if tree.model is not CostModel.EDGE:
        raise InstanceError("split_at_root expects an edge-cost instance")
    root = tree.root
    dropped = tuple(r for r in instance.requests if r.node == root)
    parts = []
    for child in tree.children[root]:
        members = [u for u in tree.nodes if u == root or tree.in_subtree(u, child)]
        sub = CostTree.from_nodes(((u, tree.parent[u], tree.cost[u]) for u in members), CostModel.EDGE)
        reqs = tuple(r for r in instance.requests if r.node != root and tree.in_subtree(r.node, child))
        parts.append(Instance(sub, reqs, instance.meta))
    return RootSplit(parts, dropped)


def edge_to_node(instance: Instance, attachment: tuple[int, ...] | None = None) -> NormalizedInstance:
    """Push edge costs onto child endpoints, drop the root, merge zero-cost nodes upward."""
    tree = instance.tree
    if tree.model is not CostModel.EDGE:
        raise InstanceError("edge_to_node expects an edge-cost instance")
    root = tree.root
    kids = tree.children[root]
    if len(kids) != 1:
        raise InstanceError(f"edge_to_node needs a root with exactly one child, found {len(kids)}")
    if any(r.node == root for r in instance.requests):
        raise InstanceError("requests at the root must be dropped by split_at_root first")
    top = kids[0]
    if all(tree.cost[u] == 0 for u in tree.nodes):
        raise DegenerateInstanceError("degenerate zero-cost tree")
    if tree.cost[top] == 0:
        raise DegenerateInstanceError(f"edge into {top} has zero cost; contract it into the root first")

    survivor: dict[int, int] = {}
    for u in tree.preorder:
        if u == root:
            continue
        survivor[u] = u if tree.cost[u] > 0 else survivor[tree.parent[u]]

    rows = []
    provenance: dict[int, list[int]] = {}
    for u in tree.preorder:
        if u == root:
            continue
        s = survivor[u]
        provenance.setdefault(s, []).append(u)
        if s == u:
            par = None if u == top else survivor[tree.parent[u]]
            rows.append((u, par, tree.cost[u]))
    # keep file order among surviving nodes
    order = {u: i for i, u in enumerate(tree.nodes)}
    rows.sort(key=lambda row: order[row[0]])
    node_tree = CostTree.from_nodes(rows, CostModel.NODE)
    requests = tuple(Request(r.id, survivor[r.node], r.arrival, r.deadline) for r in instance.requests)
    return NormalizedInstance(
        node_instance=Instance(node_tree, requests, instance.meta),
        original=instance,
        provenance={s: tuple(v) for s, v in provenance.items()},
        edge_carrier=dict(survivor),
        attachment=(root,) if attachment is None else attachment,
    )


def normalize(instance: Instance) -> Normalization:
    """Full edge-to-node pipeline for an arbitrary edge-cost instance."""
    tree = instance.tree
    if tree.model is not CostModel.EDGE:
        raise InstanceError("normalize expects an edge-cost instance")
    root = tree.root
    if len(tree) > 1 and all(tree.cost[u] == 0 for u in tree.nodes):
        raise DegenerateInstanceError("degenerate zero-cost tree")

    # nodes joined to the root by zero-cost edges only are part of the root
    absorbed = {root}
    for u in tree.preorder:
        if u != root and tree.cost[u] == 0 and tree.parent[u] in absorbed:
            absorbed.add(u)
    tops = [u for u in tree.preorder if u not in absorbed and tree.parent[u] in absorbed]

    contracted_rows = [(root, None, 0)]
    for u in tree.nodes:
        if u in absorbed:
            continue
        par = root if u in tops else tree.parent[u]
        contracted_rows.append((u, par, tree.cost[u]))
    contracted = Instance(
        CostTree.from_nodes(contracted_rows, CostModel.EDGE),
        tuple(Request(r.id, root, r.arrival, r.deadline) if r.node in absorbed else r for r in instance.requests),
        instance.meta,
    )
    split = split_at_root(contracted)
    parts = []
    for part in split.parts:
        top = part.tree.children[root][0]
        attachment = tuple(tree.path_to_root(tree.parent[top]))
        norm = edge_to_node(part, attachment)
        parts.append(
            NormalizedInstance(
                node_instance=norm.node_instance,
                original=instance,
                provenance=norm.provenance,
                edge_carrier=norm.edge_carrier,
                attachment=attachment,
            )
        )
    by_id = {r.id: r for r in instance.requests}
    dropped = tuple(by_id[r.id] for r in split.dropped)
    return Normalization(instance, tuple(parts), dropped, frozenset(absorbed))


def map_back(nodes: Iterable[int], norm: NormalizedInstance) -> frozenset[int]:
    """Original-tree node set (root included) standing for a normalized node set."""
    out = set(norm.attachment)
    for u in nodes:
        if u not in norm.provenance:
            raise KeyError(f"unknown normalized node {u}")
        out.update(norm.provenance[u])
    return frozenset(out)


# -- forest decomposition ------------------------------------------------------


@dataclass(frozen=True)
class ForestDecomposition:
    source: CostTree
    trees: tuple[CostTree, ...]
    b_sets: Mapping[int, tuple[int, ...]]
    tree_of: Mapping[int, int]
    request_partition: Mapping[int, int] = field(default_factory=dict)

    def requests_of(self, requests: Iterable[Request], index: int) -> tuple[Request, ...]:
        return tuple(r for r in requests if self.tree_of[r.node] == index)

    def to_json(self) -> str:
        return json.dumps(
            {
                "trees": [[[u, p, str(c)] for u, p, c in t.to_rows()] for t in self.trees],
                "b_sets": {str(u): list(b) for u, b in self.b_sets.items()},
            }
        )


def decompose_forest(tree: CostTree, requests: Iterable[Request] = ()) -> ForestDecomposition:
    """Attach every node to its first ancestor costing at least three times as much."""
    if tree.model is not CostModel.NODE:
        raise InstanceError("decompose_forest expects a node-cost tree")
    forest_parent: dict[int, int | None] = {}
    b_sets: dict[int, tuple[int, ...]] = {}
    for u in tree.nodes:
        path = [u]
        v = tree.parent[u]
        while v is not None and tree.cost[v] < 3 * tree.cost[u]:
            path.append(v)
            v = tree.parent[v]
        forest_parent[u] = v
        b_sets[u] = tuple(path)

    roots = [u for u in tree.preorder if forest_parent[u] is None]
    tree_of: dict[int, int] = {}
    for u in tree.preorder:
        p = forest_parent[u]
        # ancestors precede u in preorder, so p is already placed
        tree_of[u] = roots.index(u) if p is None else tree_of[p]
    trees = []
    for i in range(len(roots)):
        rows = [(u, forest_parent[u], tree.cost[u]) for u in tree.nodes if tree_of[u] == i]
        trees.append(CostTree.from_nodes(rows, CostModel.NODE))
    partition = {r.id: tree_of[r.node] for r in requests}
    return ForestDecomposition(tree, tuple(trees), b_sets, tree_of, partition)
