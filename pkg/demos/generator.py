"""
Random planar transit networks
==============================

Nodes in the unit square, nearest-neighbour links that never cross, every
link usable both ways. Tickets grow linearly with the shortest-path cost.
"""

import numpy as np

from fareinspect import GeneratorConfig, budget_sweep, generate_instance
from fareinspect.generator import SIZE_CLASSES, planar_layout

for name, n in SIZE_CLASSES.items():
    counts = [2 * len(planar_layout(n, np.random.default_rng(s)).links) for s in range(10)]
    print(f"{name:7s} {n:4d} nodes  mean directed edges {np.mean(counts):6.1f}")

config = GeneratorConfig(n_nodes=25, n_commodities=5, seed=11)
inst = generate_instance(config)
for c in inst.commodities:
    print(f"  {c.source:2d} -> {c.target:2d}  demand {c.demand:5.1f}  ticket {c.ticket:.2f}")

sweep = budget_sweep(inst)
print("budgets", [round(i.budget, 2) for i in sweep])
