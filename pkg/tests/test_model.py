import json
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aggtree import fixtures as F
from aggtree.generators import GenParams, gen_random
from aggtree.model import (
    CostModel,
    CostTree,
    InstanceError,
    InstanceParseError,
    Schedule,
    StructuralError,
    Transmission,
    dump_instance,
    dump_schedule,
    parse_instance,
    parse_schedule,
    validate_3decreasing,
    verify_feasible,
)

P3_TEXT = """{
  "cost_model": "node",
  "nodes": [
    {"id": 0, "parent": null, "cost": "9"},
    {"id": 1, "parent": 0, "cost": "3"},
    {"id": 2, "parent": 1, "cost": "1"}
  ],
  "requests": [{"id": 0, "node": 2, "arrival": "0", "deadline": "5"}]
}"""


def test_parse_p3():
    inst = parse_instance(P3_TEXT)
    assert len(inst.tree) == 3
    assert inst.tree.depth == 2
    assert inst.tree.root == 0
    assert inst == F.p3()


def test_parse_exact_rationals():
    text = P3_TEXT.replace('"cost": "1"', '"cost": "1/3"').replace('"deadline": "5"', '"deadline": "2.25"')
    inst = parse_instance(text)
    assert inst.tree.cost[2] == Q(1, 3)
    assert inst.requests[0].deadline == Q(9, 4)


def test_negative_cost_rejected():
    with pytest.raises(InstanceError, match="non-positive"):
        parse_instance(P3_TEXT.replace('"cost": "3"', '"cost": "-1"'))


def test_parent_cycle_rejected():
    text = json.dumps(
        {
            "cost_model": "node",
            "nodes": [
                {"id": 0, "parent": None, "cost": "9"},
                {"id": 1, "parent": 2, "cost": "1"},
                {"id": 2, "parent": 1, "cost": "1"},
            ],
        }
    )
    with pytest.raises(InstanceError, match="not a tree"):
        parse_instance(text)


@pytest.mark.parametrize(
    "text, match",
    [
        ('{"nodes": [', "line 1"),
        ('{"nodes": []}', "non-empty"),
        ('{"cost_model": "node", "nodes": [{"id": 0, "parent": null, "cost": 1.5}]}', "not a rational"),
        ('{"nodes": [{"id": 0, "parent": null, "cost": "1"}, {"id": 0, "parent": 0, "cost": "1"}]}', "duplicate node"),
        ('{"nodes": [{"id": 0, "parent": null, "cost": "1"}, {"id": 1, "parent": 7, "cost": "1"}]}', "missing parent"),
        ('{"nodes": [{"id": 0, "parent": null, "cost": "1"}], "requests": [{"id": 0, "node": 3, "arrival": "0", "deadline": "1"}]}', "unknown node"),
        ('{"nodes": [{"id": 0, "parent": null, "cost": "1"}], "requests": [{"id": 0, "node": 0, "arrival": "2", "deadline": "1"}]}', "after deadline"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(InstanceError, match=match):
        parse_instance(text)


def test_parse_error_carries_position():
    with pytest.raises(InstanceParseError) as info:
        parse_instance('{\n  "nodes": [}')
    assert info.value.line == 2


def test_edge_model_root_cost_defaults_to_zero():
    tree = CostTree.from_nodes([(0, None, None), (1, 0, "0"), (2, 1, 4)], "edge")
    assert tree.model is CostModel.EDGE
    assert tree.cost[0] == 0
    assert tree.cost_of({0, 1, 2}) == 4


def test_validate_3decreasing():
    assert validate_3decreasing(F.p3_tree())
    assert not validate_3decreasing(F.chain421_tree())
    assert validate_3decreasing(CostTree.from_nodes([(5, None, 1)]))
    with pytest.raises(InstanceError):
        validate_3decreasing(F.edge_chain().tree)


def test_verify_feasible_examples():
    inst = F.p3()
    ok = Schedule((Transmission(Q(5), frozenset({0, 1, 2}), Q(13)),))
    assert verify_feasible(ok, inst).feasible
    late = Schedule((Transmission(Q(6), frozenset({0, 1, 2}), Q(13)),))
    report = verify_feasible(late, inst)
    assert not report.feasible
    assert report.unserviced == [0]
    with pytest.raises(StructuralError, match="connected"):
        verify_feasible(Schedule((Transmission(Q(3), frozenset({0, 2}), Q(10)),)), inst)


def test_verify_feasible_structural_cost_and_root():
    inst = F.p3()
    with pytest.raises(StructuralError, match="cost"):
        verify_feasible(Schedule((Transmission(Q(5), frozenset({0, 1, 2}), Q(12)),)), inst)
    with pytest.raises(StructuralError):
        verify_feasible(Schedule((Transmission(Q(5), frozenset({1, 2}), Q(4)),)), inst)


def test_verify_feasible_closed_window_and_first_servicer():
    inst = F.p3(((0, 2, 0, 5), (1, 1, 5, 5)))
    sched = Schedule(
        (
            Transmission(Q(0), frozenset({0, 1, 2}), Q(13)),
            Transmission(Q(5), frozenset({0, 1}), Q(12)),
        )
    )
    report = verify_feasible(sched, inst)
    assert report.serviced_by == {0: 0, 1: 1}


def test_schedule_roundtrip_and_order():
    sched = Schedule(
        (
            Transmission(Q(7, 2), frozenset({0}), Q(9)),
            Transmission(Q(1), frozenset({0, 1}), Q(12)),
        )
    )
    assert [t.time for t in sched.transmissions] == [1, Q(7, 2)]
    assert parse_schedule(dump_schedule(sched)) == sched
    assert sched.total_cost == 21


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    n=st.integers(1, 15),
    k=st.integers(0, 12),
    model=st.sampled_from(["node", "edge", "3dec"]),
)
def test_roundtrip_generated(seed, n, k, model):
    inst = gen_random(GenParams(seed=seed, n_nodes=n, n_requests=k, model=model))
    back = parse_instance(dump_instance(inst))
    assert back == inst
    assert back.tree.to_rows() == inst.tree.to_rows()
    assert dump_instance(back) == dump_instance(inst)


def test_roundtrip_nontrivial_rationals():
    tree = CostTree.from_nodes([(0, None, Q(27, 7)), (1, 0, Q(1, 3))])
    inst = F.p3().__class__(tree, ())
    assert parse_instance(dump_instance(inst)).tree.cost[0] == Q(27, 7)


def test_depth_and_subtree_queries():
    tree = F.twobr().tree
    assert tree.depth == 2
    assert tree.in_subtree(F.W1, F.U1)
    assert not tree.in_subtree(F.W1, F.U2)
    assert tree.path_to_root(F.W1) == [F.W1, F.U1, F.R]
    assert tree.is_rooted_subtree({F.R, F.U2})
    assert not tree.is_rooted_subtree({F.U1, F.W1})
