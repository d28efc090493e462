"""Small hand-checkable instances used by tests and demos."""
from __future__ import annotations

from fractions import Fraction as Q

from .model import CostModel, CostTree, Instance, Request

# node ids
R, U, W = 0, 1, 2
U1, U2, W1 = 1, 2, 3
A, B, C = 0, 1, 2


def p3_tree() -> CostTree:
    """Chain r(9) -> u(3) -> w(1)."""
    return CostTree.from_nodes([(R, None, 9), (U, R, 3), (W, U, 1)])


def p3(requests=((0, W, 0, 5),)) -> Instance:
    return Instance(p3_tree(), tuple(Request(i, n, Q(a), Q(d)) for i, n, a, d in requests))


def twobr() -> Instance:
    tree = CostTree.from_nodes([(R, None, 9), (U1, R, 3), (U2, R, 3), (W1, U1, 1)])
    return Instance(tree, (Request(1, W1, Q(0), Q(5)), Request(2, U2, Q(0), Q(7))))


def fan6() -> Instance:
    tree = CostTree.from_nodes([(0, None, 9)] + [(k, 0, 3) for k in range(1, 7)])
    return Instance(tree, tuple(Request(k - 1, k, Q(0), Q(4 + k)) for k in range(1, 7)))


def chain421_tree() -> CostTree:
    return CostTree.from_nodes([(A, None, 4), (B, A, 2), (C, B, 1)])


def chain421(requests=((0, C, 0, 3),)) -> Instance:
    return Instance(chain421_tree(), tuple(Request(i, n, Q(a), Q(d)) for i, n, a, d in requests))


def edge_chain(second_edge=2) -> Instance:
    """EDGE chain R -5-> x -k-> y with one request at y over [0, 3]."""
    tree = CostTree.from_nodes([(0, None, 0), (1, 0, 5), (2, 1, second_edge)], CostModel.EDGE)
    return Instance(tree, (Request(0, 2, Q(0), Q(3)),))
