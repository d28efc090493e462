from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggtree import fixtures as F
from aggtree.generators import GenParams, gen_random
from aggtree.model import CostModel, CostTree, Instance, Request, Schedule, Transmission, validate_3decreasing, verify_feasible
from aggtree.oracle import solve_opt
from aggtree.reductions import (
    DegenerateInstanceError,
    decompose_forest,
    edge_to_node,
    map_back,
    normalize,
    split_at_root,
)


def edge_tree(rows):
    return CostTree.from_nodes(rows, CostModel.EDGE)


def test_split_two_children():
    tree = edge_tree([(0, None, 0), (1, 0, 3), (2, 0, 4), (3, 1, 1)])
    inst = Instance(tree, (Request(0, 3, Q(0), Q(1)), Request(1, 2, Q(0), Q(2))))
    parts, dropped = split_at_root(inst)
    assert len(parts) == 2
    assert dropped == ()
    assert [set(p.tree.nodes) for p in parts] == [{0, 1, 3}, {0, 2}]
    assert [[r.id for r in p.requests] for p in parts] == [[0], [1]]


def test_split_single_child_identity():
    inst = F.edge_chain()
    parts, dropped = split_at_root(inst)
    assert len(parts) == 1
    assert parts[0] == inst
    assert dropped == ()


def test_split_drops_root_requests():
    tree = edge_tree([(0, None, 0), (1, 0, 3)])
    inst = Instance(tree, (Request(0, 0, Q(0), Q(1)), Request(1, 1, Q(0), Q(1))))
    parts, dropped = split_at_root(inst)
    assert [r.id for r in dropped] == [0]
    assert all(r.id != 0 for p in parts for r in p.requests)


def test_split_leaf_root():
    tree = edge_tree([(0, None, 0)])
    parts, dropped = split_at_root(Instance(tree, (Request(0, 0, Q(0), Q(1)),)))
    assert parts == [] and len(dropped) == 1


def test_edge_to_node_chain():
    norm = edge_to_node(F.edge_chain())
    tree = norm.tree
    assert tree.model is CostModel.NODE
    assert tree.to_rows() == [(1, None, 5), (2, 1, 2)]
    assert norm.node_instance.requests == (Request(0, 2, Q(0), Q(3)),)


def test_edge_to_node_zero_merge():
    norm = edge_to_node(F.edge_chain(second_edge=0))
    assert norm.tree.to_rows() == [(1, None, 5)]
    assert norm.node_instance.requests[0].node == 1
    assert norm.provenance == {1: (1, 2)}


def test_edge_to_node_all_zero_degenerate():
    tree = edge_tree([(0, None, 0), (1, 0, 0), (2, 1, 0)])
    with pytest.raises(DegenerateInstanceError, match="degenerate zero-cost tree"):
        edge_to_node(Instance(tree, (Request(0, 2, Q(0), Q(1)),)))
    with pytest.raises(DegenerateInstanceError):
        normalize(Instance(tree, ()))


def test_edge_to_node_preconditions():
    tree = edge_tree([(0, None, 0), (1, 0, 1), (2, 0, 1)])
    with pytest.raises(ValueError, match="exactly one child"):
        edge_to_node(Instance(tree, ()))
    with pytest.raises(ValueError, match="dropped"):
        edge_to_node(Instance(edge_tree([(0, None, 0), (1, 0, 1)]), (Request(0, 0, Q(0), Q(0)),)))


def test_map_back_examples():
    norm = edge_to_node(F.edge_chain())
    orig = norm.original.tree
    s = map_back({1}, norm)
    assert orig.edges_of(s) == {(0, 1)} and orig.cost_of(s) == 5
    s = map_back({1, 2}, norm)
    assert orig.edges_of(s) == {(0, 1), (1, 2)} and orig.cost_of(s) == 7

    merged = edge_to_node(F.edge_chain(second_edge=0))
    s = map_back({1}, merged)
    assert merged.original.tree.edges_of(s) == {(0, 1), (1, 2)}
    assert merged.original.tree.cost_of(s) == 5
    with pytest.raises(KeyError):
        map_back({9}, norm)


def test_normalize_contracts_zero_root_edges():
    # root -0-> a, a -4-> b, a -2-> c: a is part of the root, two parts remain
    tree = edge_tree([(0, None, 0), (1, 0, 0), (2, 1, 4), (3, 1, 2)])
    reqs = (Request(0, 1, Q(0), Q(2)), Request(1, 2, Q(0), Q(3)), Request(2, 3, Q(1), Q(3)))
    norm = normalize(Instance(tree, reqs))
    assert [p.tree.to_rows() for p in norm.parts] == [[(2, None, 4)], [(3, None, 2)]]
    assert [r.id for r in norm.dropped_requests] == [0]
    assert norm.absorbed == {0, 1}
    assert map_back({2}, norm.parts[0]) == {0, 1, 2}


def test_decompose_p3_identity():
    d = decompose_forest(F.p3_tree())
    assert len(d.trees) == 1
    assert d.trees[0] == F.p3_tree()
    assert d.b_sets == {0: (0,), 1: (1,), 2: (2,)}


def test_decompose_chain421():
    a, b, c = F.A, F.B, F.C
    d = decompose_forest(F.chain421_tree(), F.chain421().requests)
    assert [t.to_rows() for t in d.trees] == [[(a, None, 4), (c, a, 1)], [(b, None, 2)]]
    assert d.b_sets == {a: (a,), b: (b, a), c: (c, b)}
    assert d.request_partition == {0: 0}


def test_decompose_single_node():
    d = decompose_forest(CostTree.from_nodes([(7, None, 2)]))
    assert len(d.trees) == 1 and d.b_sets == {7: (7,)}


def _first_heavy_ancestor(tree, u):
    """Reference: scan the whole root path and take the closest qualifying node."""
    path = tree.path_to_root(u)[1:]
    hits = [i for i, v in enumerate(path) if tree.cost[v] >= 3 * tree.cost[u]]
    return path[hits[0]] if hits else None


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 25), hi=st.sampled_from([3, 10, 100]))
def test_forest_properties(seed, n, hi):
    inst = gen_random(GenParams(seed=seed, n_nodes=n, n_requests=8, cost_hi=hi, max_depth=6, max_fanout=3))
    tree = inst.tree
    d = decompose_forest(tree, inst.requests)
    # node sets partition
    seen = [u for t in d.trees for u in t.nodes]
    assert sorted(seen) == sorted(tree.nodes)
    for t in d.trees:
        assert validate_3decreasing(t)
        for u in t.nodes:
            assert t.parent[u] == _first_heavy_ancestor(tree, u)
    for u, b in d.b_sets.items():
        assert b[0] == u
        assert all(tree.parent[x] == y for x, y in zip(b, b[1:]))
        assert all(tree.cost[w] < 3 * tree.cost[u] for w in b)
        fp = d.trees[d.tree_of[u]].parent[u]
        if fp is None:
            assert b[-1] == tree.root
        else:
            assert tree.parent[b[-1]] == fp
    # concatenated B-sets along a forest root path cover the source root path
    for u in tree.nodes:
        t = d.trees[d.tree_of[u]]
        covered = set()
        for v in t.path_to_root(u):
            covered.update(d.b_sets[v])
        assert set(tree.path_to_root(u)) <= covered
        assert tree.is_rooted_subtree(covered)
    assert set(d.request_partition) == {r.id for r in inst.requests}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 20))
def test_decompose_idempotent_on_3decreasing(seed, n):
    tree = gen_random(GenParams(seed=seed, n_nodes=n, n_requests=0, model="3dec")).tree
    d = decompose_forest(tree)
    assert len(d.trees) == 1 and d.trees[0] == tree
    assert all(b == (u,) for u, b in d.b_sets.items())


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(1, 20), zp=st.sampled_from([0.0, 0.3, 0.6]))
def test_normalize_properties(seed, n, zp):
    inst = gen_random(GenParams(seed=seed, n_nodes=n, n_requests=10, model="edge", zero_edge_prob=zp))
    tree = inst.tree
    if len(tree) > 1 and all(tree.cost[u] == 0 for u in tree.nodes):
        with pytest.raises(DegenerateInstanceError):
            normalize(inst)
        return
    norm = normalize(inst)
    seen = [r.id for r in norm.dropped_requests] + [r.id for p in norm.parts for r in p.node_instance.requests]
    assert sorted(seen) == sorted(r.id for r in inst.requests)
    for part in norm.parts:
        nt = part.tree
        assert nt.model is CostModel.NODE
        assert all(c > 0 for c in nt.cost.values())
        assert nt.depth < max(tree.depth, 1)
        # cost preservation on every root-path subtree and on the whole part
        for u in nt.nodes:
            s = set(nt.path_to_root(u))
            back = map_back(s, part)
            assert tree.is_rooted_subtree(back)
            assert tree.cost_of(back) == nt.cost_of(s)
        back = map_back(nt.nodes, part)
        assert tree.cost_of(back) == nt.cost_of(nt.nodes)
        # requests keep windows and land on a node standing for their original node
        by_id = {r.id: r for r in inst.requests}
        for r in part.node_instance.requests:
            orig = by_id[r.id]
            assert (r.arrival, r.deadline) == (orig.arrival, orig.deadline)
            assert orig.node in part.provenance[r.node]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_solution_equivalence_both_ways(seed):
    """OPT of the edge instance equals the summed OPT of its normalized parts."""
    inst = gen_random(
        GenParams(seed=seed, n_nodes=6, n_requests=4, horizon=3, max_depth=3, model="edge", zero_edge_prob=0.3)
    )
    tree = inst.tree
    if len(tree) > 1 and all(tree.cost[u] == 0 for u in tree.nodes):
        return
    norm = normalize(inst)
    edge_opt = solve_opt(inst)
    part_opts = [solve_opt(p.node_instance) for p in norm.parts]
    assert edge_opt.cost == sum(s.cost for s in part_opts)
    # normalized -> original: mapped schedules stay feasible at equal cost
    mapped = []
    for p, sol in zip(norm.parts, part_opts):
        for tr in sol.schedule.transmissions:
            nodes = map_back(tr.nodes, p)
            mapped.append(Transmission(tr.time, nodes, tree.cost_of(nodes)))
    for t in {r.deadline for r in norm.dropped_requests}:
        mapped.append(Transmission(t, norm.absorbed, Q(0)))
    sched = Schedule(tuple(mapped))
    assert sched.total_cost == edge_opt.cost
    assert verify_feasible(sched, inst).feasible
