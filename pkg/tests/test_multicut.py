import itertools

import numpy as np

from conftest import random_instance
from fareinspect import (VARIANTS, Commodity, Network, make_instance, minimum_multicut,
                         multicut_start, total_profit)
from fareinspect.multicut import is_multicut


def reaches(net, removed, s, t):
    seen, todo = {s}, [s]
    while todo:
        v = todo.pop()
        for e in net.out_edges[v]:
            w = net.edges[e].head
            if e not in removed and w not in seen:
                seen.add(w)
                todo.append(w)
    return t in seen


def pairs_of(inst):
    return [(c.source, c.target) for c in inst.commodities]


def test_example_cut_is_the_bridge(ex43):
    assert minimum_multicut(ex43.network, pairs_of(ex43)) == [0]
    assert multicut_start(ex43).tolist() == [1.0, 0.0, 0.0]
    assert multicut_start(ex43.with_budget(0.4)).tolist() == [0.4, 0.0, 0.0]


def test_two_disjoint_routes_need_two_edges():
    net = Network(list("st"), [(0, 1, 1.0), (0, 1, 1.0)])
    inst = make_instance(net, [Commodity(0, 1, 1.0, 1.0)], 1.0, 1.0)
    assert len(minimum_multicut(net, pairs_of(inst))) == 2
    assert multicut_start(inst).tolist() == [0.5, 0.5]


def test_exact_cut_is_minimum():
    rng = np.random.default_rng(6)
    for _ in range(40):
        inst = random_instance(rng, n_hi=6)
        net, pairs = inst.network, pairs_of(inst)
        if net.n_edges > 12:
            continue
        cut = minimum_multicut(net, pairs)
        assert all(not reaches(net, set(cut), s, t) for s, t in pairs)
        smaller = any(is_multicut(net, c, pairs)
                      for c in itertools.combinations(range(net.n_edges), len(cut) - 1))
        assert not smaller


def test_greedy_cut_separates_every_pair():
    rng = np.random.default_rng(7)
    for _ in range(20):
        inst = random_instance(rng, n_lo=8, n_hi=12, density=(3, 4), n_commodities=(3, 8))
        net, pairs = inst.network, pairs_of(inst)
        cut = minimum_multicut(net, pairs, exact_limit=0)
        assert all(not reaches(net, set(cut), s, t) for s, t in pairs)
        # reverse deletion leaves no redundant edge
        for e in cut:
            assert not is_multicut(net, set(cut) - {e}, pairs)


def test_certain_cut_collects_full_demand():
    # zero costs and T = F = 1: p = 1 on a cut inspects every passenger
    net = Network(list("abcd"), [(0, 1, 0), (1, 2, 0), (2, 3, 0), (0, 2, 0)])
    coms = [Commodity(0, 3, 2.0, 1.0), Commodity(1, 3, 3.0, 1.0)]
    inst = make_instance(net, coms, 1.0, 1.0)
    p = multicut_start(inst)
    assert p.tolist() == [0.0, 0.0, 1.0, 0.0]
    for v in VARIANTS:
        assert total_profit(inst, p, v) == 5.0
