"""
Budget sweep study
==================

Three small generated instances, the default 20-budget sweep and all four
variants. Prints the mean gap table and the profit curve of one variant;
the CLI's ``bench`` subcommand writes the same numbers as CSV.
"""

from fareinspect import GeneratorConfig, default_budgets, generate_instance
from fareinspect.bench import SweepSettings, aggregate, budget_curve, run_instance

settings = SweepSettings(algorithms=("lp", "lp+ls", "mc", "mc+ls"),
                         budgets=tuple(default_budgets()))
records = []
for seed in range(3):
    inst = generate_instance(GeneratorConfig(n_nodes=12, n_commodities=10, seed=seed))
    records += run_instance(inst, f"demo_n12_k10_seed{seed}", seed, settings)

for row in aggregate(records):
    print(f"{row['variant']:7s} {row['algorithm']:6s} mean gap {row['mean_gap']:.3f}")

print("flex-n, lp+ls: budget vs mean profit")
for row in budget_curve(records):
    if row["variant"] == "flex-n" and row["algorithm"] == "lp+ls":
        print(f"  {row['budget']:7.3f}  {row['mean_profit']:9.3f}")
