import json

import numpy as np
import pytest

from conftest import cycle_instance, random_instance, random_strategy
from oracles import grid_points, profit_on_grid
from fareinspect import (FLEX_N, VARIANTS, Commodity, LocalSearchConfig, Network,
                         local_search, make_instance, round_relaxation, solve_relaxation,
                         support_set, total_profit)
from fareinspect.network import TOL


def test_config_defaults_and_validation():
    cfg = LocalSearchConfig()
    assert (cfg.k, cfg.delta0, cfg.decay, cfg.max_iterations) == (1, 0.1, 0.9, 30)
    assert LocalSearchConfig.from_json(json.dumps(cfg.to_dict())) == cfg
    for bad in ({"k": 0}, {"delta0": 0}, {"decay": 1.0}, {"stall_patience": 0}):
        with pytest.raises(ValueError):
            LocalSearchConfig(**bad)
    with pytest.raises(ValueError, match="unknown"):
        LocalSearchConfig.from_dict({"steps": 3})


def test_support_threshold():
    assert support_set(np.array([0.0, 1e-7, 2e-6, 0.5])) == [2, 3]
    assert support_set(solve_relaxation(cycle_instance(5), "supergradient")) == [0, 1, 2, 3, 4]
    assert support_set(solve_relaxation(cycle_instance(5).with_budget(0.0))) == []


def test_single_edge_support_changes_nothing(ex43):
    start = np.array([1.0, 0.0, 0.0])
    sol = local_search(ex43, FLEX_N, start, [0])
    assert sol.strategy.tolist() == start.tolist()
    assert sol.history == [sol.profit] * len(sol.history)


def naive_search(inst, variant, start, support, cfg):
    """Reference: every move evaluated from scratch."""
    p = start.copy()
    profit = total_profit(inst, p, variant)
    delta = cfg.delta0
    stalled = 0
    for _ in range(cfg.max_iterations):
        best_q, best = None, profit
        for a in support:
            for b in support:
                if a == b:
                    continue
                amount = min(delta, p[a], 1 - p[b])
                if amount <= 1e-12:
                    continue
                q = p.copy()
                q[a] = max(q[a] - amount, 0.0)
                q[b] = min(q[b] + amount, 1.0)
                val = total_profit(inst, q, variant)
                if val > best + TOL * max(1.0, abs(best)):
                    best_q, best = q, val
        before = profit
        if best_q is not None and best > before:
            p, profit = best_q, best
        delta *= cfg.decay
        gain = (profit - before) / max(abs(before), 1e-12)
        stalled = stalled + 1 if gain < cfg.stall_threshold else 0
        if stalled >= cfg.stall_patience:
            break
    return p, profit


def test_filtered_search_matches_naive_search():
    rng = np.random.default_rng(13)
    cfg = LocalSearchConfig()
    for trial in range(40):
        inst = random_instance(rng, n_hi=8, n_commodities=(2, 7))
        m = inst.network.n_edges
        support = sorted(rng.choice(m, size=min(m, 6), replace=False).tolist())
        start = np.zeros(m)
        start[support] = random_strategy(rng, len(support), inst.budget)
        variant = VARIANTS[trial % 4]
        sol = local_search(inst, variant, start, support, cfg)
        p, profit = naive_search(inst, variant, start, support, cfg)
        assert sol.profit == pytest.approx(profit, abs=1e-9)
        np.testing.assert_allclose(sol.strategy, p, atol=1e-12)


def test_cycle_search_keeps_rounded_profit():
    inst = cycle_instance(5)
    rel = solve_relaxation(inst, "supergradient")
    start = round_relaxation(inst, rel, FLEX_N)
    sol = local_search(inst, FLEX_N, start.strategy, support_set(rel))
    assert sol.profit >= 5 * (1 - 0.75 ** 4) - 1e-12
    assert sol.provenance == "local-search(start)"


def test_concentrating_the_budget():
    # two edges in series: inspecting one edge for sure beats splitting
    net = Network(["s", "v", "t"], [(0, 1, 0.0), (1, 2, 0.0)])
    inst = make_instance(net, [Commodity(0, 2, 1.0, 1.0)], 1.0, 1.0)
    grid = profit_on_grid([(0, 1, 0.0), (1, 2, 0.0)], 3, [(0, 2, 1.0, 1.0)], 1.0,
                          grid_points(2, 0.01, 1.0), "flex-n").max()
    sol = local_search(inst, FLEX_N, np.array([0.5, 0.5]), [0, 1])
    assert grid == pytest.approx(1.0)
    assert sol.profit >= grid - 1e-3


@pytest.mark.parametrize("k", [1, 2])
def test_contract_on_random_instances(k):
    rng = np.random.default_rng(40 + k)
    cfg = LocalSearchConfig(k=k, max_moves=200)
    for trial in range(12):
        inst = random_instance(rng, n_commodities=(2, 5))
        start = random_strategy(rng, inst.network.n_edges, inst.budget)
        variant = VARIANTS[trial % 4]
        sol = local_search(inst, variant, start, config=cfg)
        assert np.all(np.diff(sol.history) >= 0)
        assert abs(sol.strategy.sum() - start.sum()) <= 1e-9
        assert sol.strategy.min() >= 0 and sol.strategy.max() <= 1
        assert sol.iterations <= cfg.max_iterations
        assert sol.profit == pytest.approx(total_profit(inst, sol.strategy, variant))


def test_sampled_moves_are_reproducible():
    rng = np.random.default_rng(50)
    inst = random_instance(rng, n_lo=8, n_commodities=(3, 5))
    start = random_strategy(rng, inst.network.n_edges, inst.budget)
    cfg = LocalSearchConfig(k=2, max_moves=30, seed=4)
    a = local_search(inst, VARIANTS[0], start, config=cfg)
    b = local_search(inst, VARIANTS[0], start, config=cfg)
    assert a.strategy.tolist() == b.strategy.tolist()


def test_approximate_followers_option():
    rng = np.random.default_rng(60)
    inst = random_instance(rng, n_commodities=(2, 4))
    start = random_strategy(rng, inst.network.n_edges, inst.budget)
    sol = local_search(inst, FLEX_N, start, epsilon=0.1)
    assert np.all(np.diff(sol.history) >= 0)
