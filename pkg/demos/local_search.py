"""
Local search from two starts
============================

On a random planar instance, start once from the relaxation and once from a
multicut, then shift inspection mass between support edges while profit
improves. The relaxation value bounds everything.
"""

from fareinspect import (VARIANTS, GeneratorConfig, generate_instance, local_search,
                         multicut_start, round_relaxation, solve_relaxation, support_set)

inst = generate_instance(GeneratorConfig(n_nodes=15, n_commodities=12, seed=3), budget=2.0)
print(f"{inst.network.n_nodes} nodes, {inst.network.n_edges} edges, budget {inst.budget}")

for variant in VARIANTS:
    rel = solve_relaxation(inst, fares=variant.fares)
    lp = round_relaxation(inst, rel, variant)
    lp_ls = local_search(inst, variant, lp.strategy, support_set(rel), upper_bound=rel.bound)
    mc = multicut_start(inst)
    mc_ls = local_search(inst, variant, mc, support_set(mc), upper_bound=rel.bound)
    print(f"{variant.code:7s} bound {rel.objective:7.3f}  lp {lp.profit:7.3f}  "
          f"lp+ls {lp_ls.profit:7.3f}  mc+ls {mc_ls.profit:7.3f}  "
          f"({lp_ls.iterations} iterations, gap {lp_ls.gap:.3f})")
