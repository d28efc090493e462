"""
From edge costs to node costs
=============================

Edge-cost trees are split at the root and turned into node-cost trees,
one per root child. Schedules come back through ``map_back``.
"""

from fractions import Fraction

from aggtree.model import CostModel, CostTree, Instance, Request, verify_feasible
from aggtree.reductions import map_back, normalize
from aggtree.simulator import run_online_edge

# root -0-> x, then x -4-> y and x -2-> z; the zero edge folds x into the root
tree = CostTree.from_nodes([(0, None, 0), (1, 0, 0), (2, 1, 4), (3, 1, 2)], CostModel.EDGE)
reqs = (
    Request(0, 1, Fraction(0), Fraction(2)),
    Request(1, 2, Fraction(0), Fraction(3)),
    Request(2, 3, Fraction(1), Fraction(3)),
)
inst = Instance(tree, reqs)

norm = normalize(inst)
print("absorbed into root:", sorted(norm.absorbed))
print("free requests:", [r.id for r in norm.dropped_requests])
for k, part in enumerate(norm.parts):
    print(f"part {k}:", part.tree.to_rows(), "-> maps back to", sorted(map_back(part.tree.nodes, part)))

res = run_online_edge(inst)
sched = res.to_schedule()
for tr in sched.transmissions:
    print(f"t={tr.time} nodes={sorted(tr.nodes)} cost={tr.cost}")
print("total", sched.total_cost, "feasible", verify_feasible(sched, inst).feasible)
