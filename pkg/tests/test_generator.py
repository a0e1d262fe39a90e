import numpy as np
import pytest

from oracles import any_crossing
from fareinspect import (Commodity, GeneratorConfig, budget_sweep, default_budgets,
                         generate_commodities, generate_instance, generate_planar,
                         make_instance)
from fareinspect.generator import (MINUTES_PER_UNIT, EURO_PER_MINUTE, instance_filename,
                                   planar_layout, size_class_config, ticket_price)
from fareinspect.network import all_pairs_distances, dump_instance


def test_config_validation():
    for bad in ({"n_nodes": 1}, {"base_price": -1.0}, {"base_price": 5.0, "price_slope": 2.0},
                {"demand_range": (5.0, 1.0)}, {"budget_list": (-1.0,)}, {"n_commodities": -1}):
        with pytest.raises(ValueError):
            GeneratorConfig(**bad)


def test_two_nodes_give_one_link_both_ways():
    net = generate_planar(GeneratorConfig(n_nodes=2, n_commodities=1, seed=3))
    assert net.n_nodes == 2 and net.n_edges == 2
    (a, b) = net.edges
    assert (a.tail, a.head) == (b.head, b.tail) and a.cost == b.cost


def test_same_seed_same_instance():
    cfg = GeneratorConfig(n_nodes=15, n_commodities=10, seed=99)
    assert dump_instance(generate_instance(cfg)) == dump_instance(generate_instance(cfg))
    other = GeneratorConfig(n_nodes=15, n_commodities=10, seed=100)
    assert dump_instance(generate_instance(cfg)) != dump_instance(generate_instance(other))


def test_edge_costs_are_scaled_lengths():
    cfg = GeneratorConfig(n_nodes=12, n_commodities=0, seed=5)
    layout = planar_layout(12, np.random.default_rng(5))
    net = generate_planar(cfg)
    for j, (u, v) in enumerate(layout.links):
        length = float(np.hypot(*(layout.coords[u] - layout.coords[v])))
        for e in net.edges[2 * j: 2 * j + 2]:
            assert {e.tail, e.head} == {u, v}
            assert e.cost == pytest.approx(length * MINUTES_PER_UNIT * EURO_PER_MINUTE)
    assert MINUTES_PER_UNIT * np.sqrt(2) == pytest.approx(60.0)


def test_layouts_are_planar_and_connected():
    for seed in range(20):
        layout = planar_layout(30, np.random.default_rng(seed))
        assert not any_crossing(layout.coords, layout.links)
        assert len(set(layout.links)) == len(layout.links)
        net = generate_planar(GeneratorConfig(n_nodes=30, seed=seed))
        assert np.isfinite(all_pairs_distances(net, net.costs)).all()


def test_ticket_formula_endpoints_and_monotonicity():
    cfg = GeneratorConfig(base_price=1.0, price_slope=2.0, fine=6.0)
    assert ticket_price(4.0, 4.0, cfg) == 3.0
    assert ticket_price(0.0, 4.0, cfg) == 1.0
    assert ticket_price(0.0, 0.0, cfg) == 1.0
    prices = [ticket_price(x, 4.0, cfg) for x in np.linspace(0, 4, 9)]
    assert prices == sorted(prices)


def test_commodities():
    cfg = GeneratorConfig(n_nodes=10, n_commodities=30, seed=1)
    net = generate_planar(cfg)
    coms = generate_commodities(net, cfg)
    pairs = [(c.source, c.target) for c in coms]
    assert len(set(pairs)) == 30 and all(s != t for s, t in pairs)
    assert all(1.0 <= c.demand <= 50.0 for c in coms)
    sp = all_pairs_distances(net, net.costs)
    by_sp = sorted(coms, key=lambda c: sp[c.source, c.target])
    assert [c.ticket for c in by_sp] == sorted(c.ticket for c in coms)
    assert all(c.ticket <= cfg.fine for c in coms)
    make_instance(net, coms, cfg.fine, 1.0)      # validates T_i <= F
    # with every pair drawn, the pair at maximum distance pays b + m
    full = GeneratorConfig(n_nodes=4, n_commodities=12, seed=2)
    net4 = generate_planar(full)
    coms4 = generate_commodities(net4, full)
    sp4 = all_pairs_distances(net4, net4.costs)
    top = max(coms4, key=lambda c: sp4[c.source, c.target])
    assert top.ticket == pytest.approx(full.base_price + full.price_slope)


def test_too_many_commodities():
    cfg = GeneratorConfig(n_nodes=3, n_commodities=7)
    with pytest.raises(ValueError, match="distinct ordered pairs"):
        generate_commodities(generate_planar(cfg), cfg)


def test_budget_sweep():
    budgets = default_budgets()
    assert len(budgets) == 20
    assert budgets[0] == pytest.approx(0.2) and budgets[-1] == pytest.approx(25.0)
    assert budgets == sorted(budgets)
    inst = generate_instance(GeneratorConfig(n_nodes=6, n_commodities=3))
    sweep = budget_sweep(inst)
    assert [i.budget for i in sweep] == budgets
    assert all(i.network is inst.network for i in sweep)
    assert [i.budget for i in budget_sweep(inst, [2.5])] == [2.5]
    for bad in ([], [-1.0]):
        with pytest.raises(ValueError):
            budget_sweep(inst, bad)


def test_filename_and_size_classes():
    cfg = size_class_config("medium", seed=7)
    assert (cfg.n_nodes, cfg.n_commodities, cfg.seed) == (50, 50, 7)
    assert instance_filename("medium", cfg, 2.5) == "medium_n50_k50_seed7_b2.5.json"


def test_instance_uses_first_listed_budget():
    cfg = GeneratorConfig(n_nodes=5, n_commodities=2, budget_list=(3.0, 4.0))
    assert generate_instance(cfg).budget == 3.0
    assert generate_instance(cfg, budget=0.5).budget == 0.5
    assert isinstance(generate_instance(cfg).commodities[0], Commodity)
