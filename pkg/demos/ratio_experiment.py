"""
Online cost against the offline optimum
=======================================

Small random instances, exact optimum by enumeration, and the ratio
next to the depth-dependent bound.
"""

from collections import defaultdict

from aggtree.generators import gen_batch
from aggtree.harness import compare_instance

rows = [
    compare_instance(inst, str(i))
    for i, inst in enumerate(gen_batch(150, seed=7, n_nodes=7, n_requests=5, horizon=4))
]

# worst observed ratio per depth
worst = defaultdict(int)
for r in rows:
    if r.ratio is not None:
        worst[r.depth] = max(worst[r.depth], r.ratio)
for depth in sorted(worst):
    print(f"depth {depth}: worst ratio {worst[depth]} ({float(worst[depth]):.3f})")

print("all within bound:", all(r.within_bound for r in rows))
