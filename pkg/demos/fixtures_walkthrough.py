"""
Walking through one transmission
================================

Budgets, aggregation sets and the final subtree on three small trees.
"""

from fractions import Fraction

from aggtree import fixtures
from aggtree.oracle import solve_opt
from aggtree.simulator import run_online
from aggtree.transmission import select_transmission_tree

# A chain r(9) -> u(3) -> w(1) with one request at w due at time 5.
# The root starts with budget 2 * 9 and hands it to its aggregation set
# in proportion to cost.
p3 = fixtures.p3()
v = select_transmission_tree(p3.tree, p3.requests, Fraction(5))
print("P3 budgets:", {u: str(b) for u, b in v.budgets.items()})
print("P3 A_r:", v.a_sets[0], "cost", v.cost)

# Two branches. Both requests fit in the root's half budget, so a single
# transmission at t=5 picks up the second request two time units early.
twobr = fixtures.twobr()
t = run_online(twobr)
for e in t.events:
    print(f"TWOBR t={e.time} nodes={sorted(e.concrete.node_union)} serviced={e.serviced}")
print("TWOBR ALG", t.alg_cost, "OPT", solve_opt(twobr).cost)

# Six equal children under a root of cost 9. The guard c(A_r) <= 9 admits
# four children, the remaining two go out when the fifth request matures.
fan6 = fixtures.fan6()
t = run_online(fan6)
for e in t.events:
    print(f"FAN6 t={e.time} cost={e.concrete.union_cost} serviced={e.serviced}")
opt = solve_opt(fan6).cost
print("FAN6 ALG", t.alg_cost, "OPT", opt, "ratio", t.alg_cost / opt)
