import re

import numpy as np
import pytest

from fareinspect import Commodity, Network, make_instance
from oracles import dist_matrix

CRITERIA = {
    1: "worked 4/3 example values and speed",
    2: "follower solvers match the brute-force oracle",
    3: "approximation scheme stays within 1+eps",
    4: "adaptivity sandwich",
    5: "property suites (sum sandwich, decomposition, suffixes, fare order)",
    6: "relaxation bounds every profit",
    7: "rounding guarantees for flexible fares",
    8: "cycle family tightness trend",
    9: "local search contract",
    10: "small-class study gaps and runtime",
    11: "generator validity across size classes",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d\d)_", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in CRITERIA.items():
        if k not in _outcomes:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN  {title}")
            continue
        verdict = "PASS" if all(_outcomes[k]) else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  {title}")


# ------------------------------------------------------------------ instances

def example_43(budget=1.5, ticket=2.0):
    """s -> v (cost 0), then v -> t twice: cost 0 and cost 1; F = 2."""
    net = Network(["s", "v", "t"], [(0, 1, 0.0), (1, 2, 0.0), (1, 2, 1.0)])
    return make_instance(net, [Commodity(0, 2, 1.0, ticket)], 2.0, budget)


P_43 = np.array([0.5, 1.0, 0.0])


def cycle_instance(n, budget=None):
    """Directed n-cycle, zero costs, F = T = 1, commodity i -> i-1 on every node."""
    net = Network([f"c{i}" for i in range(n)], [(i, (i + 1) % n, 0.0) for i in range(n)])
    coms = [Commodity(i, (i - 1) % n, 1.0, 1.0) for i in range(n)]
    return make_instance(net, coms, 1.0, n / (n - 1) if budget is None else budget)


def fixed_gap_instance(L, eps=0.0, ticket=2.0):
    """L parallel s1-t1 edges of cost 1 plus a zero-cost path s1-s2-t2-t1; F = 2.

    Commodity 0 travels s1 -> t1 with demand L, commodity 1 travels s2 -> t2
    with demand 1. The budget is 1/2 + eps.
    """
    edges = [(0, 3, 1.0)] * L + [(0, 1, 0.0), (1, 2, 0.0), (2, 3, 0.0)]
    net = Network(["s1", "s2", "t2", "t1"], edges)
    coms = [Commodity(0, 3, float(L), ticket), Commodity(1, 2, 1.0, ticket)]
    return make_instance(net, coms, 2.0, 0.5 + eps)


def random_digraph(rng, n_lo=3, n_hi=10, density=(1.2, 2.5), cost_hi=5.0):
    """Random multigraph with a guaranteed 0 -> n-1 path; costs on a coarse grid sometimes."""
    n = int(rng.integers(n_lo, n_hi + 1))
    edges = [(i, i + 1, 0.0) for i in range(n - 1)]      # backbone, costs filled below
    m = int(rng.uniform(*density) * n)
    for _ in range(m):
        u, v = rng.integers(n, size=2)
        if u != v:
            edges.append((int(u), int(v), 0.0))
    rng.shuffle(edges)
    if rng.random() < 0.3:
        costs = rng.integers(0, 4, size=len(edges)).astype(float)   # ties on purpose
    else:
        costs = rng.uniform(0, cost_hi, size=len(edges))
    return n, [(u, v, float(c)) for (u, v, _), c in zip(edges, costs)]


def random_strategy(rng, m, budget=None):
    p = rng.random(m)
    mask = rng.random(m)
    p[mask < 0.25] = 0.0
    p[mask > 0.9] = 1.0
    if budget is not None and p.sum() > budget:
        p *= budget / p.sum()
    return p


def random_instance(rng, n_commodities=(1, 4), fine=None, **kw):
    n, edges = random_digraph(rng, **kw)
    net = Network([str(i) for i in range(n)], edges)
    F = float(rng.uniform(0.5, 10.0)) if fine is None else fine
    coms = [Commodity(0, n - 1, float(rng.uniform(1, 5)), float(rng.uniform(0, F)))]
    D = dist_matrix(edges, n)
    pairs = [(s, t) for s in range(n) for t in range(n) if s != t and np.isfinite(D[s, t])]
    for _ in range(int(rng.integers(*n_commodities)) - 1):
        s, t = pairs[int(rng.integers(len(pairs)))]
        coms.append(Commodity(s, t, float(rng.uniform(1, 5)), float(rng.uniform(0, F))))
    return make_instance(net, coms, F, float(rng.uniform(0.2, 3.0)))


def edge_list(inst):
    return [(e.tail, e.head, e.cost) for e in inst.network.edges]


def commodity_list(inst):
    return [(c.source, c.target, c.demand, c.ticket) for c in inst.commodities]


def random_sp_network(rng, leaves_hi=9):
    """Random two-terminal series-parallel multigraph from 0 to 1."""
    nodes = 2
    edges = []

    def build(s, t, budget):
        nonlocal nodes
        if budget <= 1:
            edges.append((s, t, float(rng.integers(0, 4)) if rng.random() < 0.4
                          else float(rng.uniform(0, 3))))
            return
        split = int(rng.integers(1, budget))
        if rng.random() < 0.5:
            mid = nodes
            nodes += 1
            build(s, mid, split)
            build(mid, t, budget - split)
        else:
            build(s, t, split)
            build(s, t, budget - split)

    build(0, 1, int(rng.integers(1, leaves_hi + 1)))
    return nodes, edges


@pytest.fixture
def ex43():
    return example_43()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
