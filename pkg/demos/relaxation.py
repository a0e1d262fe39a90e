"""
Relaxation bound and rounding
=============================

The directed n-cycle with one commodity per node, each travelling all the
way round but one edge. Spreading the budget evenly is what the relaxation
suggests; concentrating it on two edges earns more, and the ratio between
the two tends to 1 - 1/e as n grows.
"""

import math

import numpy as np

from fareinspect import (FLEX_N, Commodity, Network, make_instance, round_relaxation,
                         solve_relaxation, total_profit)


def cycle(n):
    net = Network([f"c{i}" for i in range(n)], [(i, (i + 1) % n, 0.0) for i in range(n)])
    coms = [Commodity(i, (i - 1) % n, 1.0, 1.0) for i in range(n)]
    return make_instance(net, coms, fine=1.0, budget=n / (n - 1))


for n in (5, 10, 50, 200):
    inst = cycle(n)
    rel = solve_relaxation(inst, "supergradient")
    rounded = round_relaxation(inst, rel, FLEX_N)
    alt = np.zeros(n)
    alt[0], alt[-1] = 1.0, 1 / (n - 1)
    ratio = rounded.profit / total_profit(inst, alt, FLEX_N)
    print(f"n={n:4d}  bound {rel.objective:8.4f}  rounded {rounded.profit:8.4f}  ratio {ratio:.4f}")
print("1 - 1/e =", round(1 - 1 / math.e, 4))

# the exact solver gives the same bound, with a certificate
inst = cycle(5)
print("highs bound", solve_relaxation(inst).objective)
