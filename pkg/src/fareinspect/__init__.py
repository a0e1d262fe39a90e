"""Fare-inspection strategies on transit networks.

Passengers (followers) pick routes that minimize expected cost given edge
inspection probabilities; the operator (leader) spreads an inspection budget
to maximize ticket and fine revenue.
"""

from .followers import (ADAPTIVE, NON_ADAPTIVE, AdaptiveLabels, FollowerResult,
                        OracleGuardError, brute_force_oracle, enumerate_simple_paths,
                        f_adaptive, f_nonadaptive, follower_cost, solve_adaptive,
                        solve_nonadaptive_exact, solve_nonadaptive_fptas)
from .generator import (GeneratorConfig, budget_sweep, default_budgets, generate_commodities,
                        generate_instance, generate_planar)
from .leader import (FIX_A, FIX_N, FLEX_A, FLEX_N, VARIANTS, LeaderSolution, RelaxationError,
                     RelaxationSolution, RevenueBreakdown, VariantId, evaluate_profit,
                     relaxation_value, revenue, round_relaxation, solve_relaxation,
                     total_profit)
from .localsearch import LocalSearchConfig, local_search, support_set
from .multicut import minimum_multicut, multicut_start
from .network import (Commodity, Edge, Instance, InstanceError, Network, PathLabel,
                      check_strategy, dump_instance, dump_strategy, evaluate_path,
                      load_instance, load_strategy, make_instance, read_instance,
                      shortest_path_distances)
from .seriesparallel import (Leaf, NotSeriesParallel, Parallel, Series, solve_nonadaptive_sp,
                             sp_decompose)

__version__ = "0.1.0"
