"""
Passenger best responses
========================

A three-node line with two parallel last legs: one free but always
inspected, one costing 1 but never inspected. A passenger who commits to a
route pays 2 either way; one who reroutes after a fine pays 1.5.
"""

import numpy as np

from fareinspect import (Commodity, Network, make_instance, solve_adaptive,
                         solve_nonadaptive_exact, solve_nonadaptive_fptas, solve_nonadaptive_sp)

net = Network(["s", "v", "t"], [(0, 1, 0.0), (1, 2, 0.0), (1, 2, 1.0)])
inst = make_instance(net, [Commodity(0, 2, demand=1.0, ticket=2.0)], fine=2.0, budget=1.5)
p = np.array([0.5, 1.0, 0.0])

# committed passenger: the whole (cost, survival) frontier
exact = solve_nonadaptive_exact(inst, p, 0)
print("non-adaptive", exact.value, "via edges", exact.path)
for lab in exact.frontier:
    print(f"  frontier label: cost {lab.cost}, survival {lab.survival}")

# rerouting passenger
adaptive = solve_adaptive(inst, p, 0)
print("adaptive", adaptive.value, "via edges", adaptive.path)
print("ratio", exact.value / adaptive.value)

# the approximation scheme and the series-parallel solver agree here
print("fptas (eps=0.1)", solve_nonadaptive_fptas(inst, p, 0, 0.1).value)
print("series-parallel", solve_nonadaptive_sp(inst, p, 0).value)
