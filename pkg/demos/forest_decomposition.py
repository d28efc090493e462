"""
Trees that are not 3-decreasing
===============================

The chain a(4) -> b(2) -> c(1) breaks the factor-3 rule at both steps.
Each node hangs off its first ancestor at least three times heavier, and
remembers the path segment it stands for.
"""

from fractions import Fraction

from aggtree import fixtures
from aggtree.model import Request
from aggtree.reductions import decompose_forest
from aggtree.transmission import expand_concrete, select_transmission_tree

tree = fixtures.chain421_tree()
names = {fixtures.A: "a", fixtures.B: "b", fixtures.C: "c"}

d = decompose_forest(tree)
for j, ft in enumerate(d.trees):
    print(f"forest tree {j}:", [names[u] for u in ft.preorder])
for u, path in sorted(d.b_sets.items()):
    print(f"B_{names[u]} =", [names[x] for x in path])

# A request at c is planned inside the small tree {a, c}; the virtual
# transmission {a, c} expands to the real root path a, b, c.
req = Request(0, fixtures.C, Fraction(0), Fraction(3))
v = select_transmission_tree(d.trees[0], (req,), Fraction(3))
c = expand_concrete(v, d)
print("virtual:", [names[u] for u in v.nodes], "cost", v.cost)
print("concrete:", sorted(names[u] for u in c.node_union), "cost", c.union_cost)
print("sum over B-sets:", c.multiset_cost)
