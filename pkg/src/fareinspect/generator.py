"""Random planar transit networks with commodities, tickets and budget sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .network import Commodity, Instance, Network, all_pairs_distances, make_instance

MINUTES_PER_UNIT = 60.0 / math.sqrt(2.0)   # unit-square diagonal takes an hour
EURO_PER_MINUTE = 0.132

SIZE_CLASSES = {"small": 25, "medium": 50, "large": 100, "huge": 200}


def default_budgets(count: int = 20, low: float = 0.2, high: float = 25.0) -> list[float]:
    return [float(b) for b in np.geomspace(low, high, count)]


@dataclass(frozen=True)
class GeneratorConfig:
    n_nodes: int = 25
    n_commodities: int = 25
    demand_range: tuple[float, float] = (1.0, 50.0)
    base_price: float = 1.0
    price_slope: float = 2.0
    fine: float = 6.0
    seed: int = 0
    budget_list: tuple[float, ...] = field(default_factory=lambda: tuple(default_budgets()))
    minutes_per_unit: float = MINUTES_PER_UNIT
    cost_per_minute: float = EURO_PER_MINUTE

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if self.n_commodities < 0:
            raise ValueError("number of commodities must be nonnegative")
        if self.base_price < 0 or self.price_slope < 0:
            raise ValueError("ticket pricing parameters must be nonnegative")
        if self.base_price + self.price_slope > self.fine + 1e-12:
            raise ValueError("base_price + price_slope must not exceed the fine")
        lo, hi = self.demand_range
        if not 0 <= lo <= hi:
            raise ValueError("demand range must satisfy 0 <= low <= high")
        if any(b < 0 for b in self.budget_list):
            raise ValueError("budgets must be nonnegative")


@dataclass(frozen=True)
class PlanarLayout:
    coords: np.ndarray          # (n, 2) positions in the unit square
    links: tuple[tuple[int, int], ...]   # undirected, u < v, in creation order


def _crosses(p: np.ndarray, q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Proper crossings of segment pq with each segment a[i]b[i]."""
    def orient(x, y, z):
        return (y[..., 0] - x[..., 0]) * (z[..., 1] - x[..., 1]) - \
            (y[..., 1] - x[..., 1]) * (z[..., 0] - x[..., 0])
    d1, d2 = orient(a, b, p), orient(a, b, q)
    d3, d4 = orient(p, q, a), orient(p, q, b)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _blocked(xy: np.ndarray, links: list[tuple[int, int]], u: int, v: int) -> bool:
    others = [(a, b) for a, b in links if a not in (u, v) and b not in (u, v)]
    if not others:
        return False
    ends = np.array(others)
    return bool(_crosses(xy[u], xy[v], xy[ends[:, 0]], xy[ends[:, 1]]).any())


def planar_layout(n_nodes: int, rng: np.random.Generator) -> PlanarLayout:
    """Place nodes uniformly and link them without crossings.

    Each of 3n - 6 attempts draws a node and proposes its nearest neighbour
    among the nodes it is not yet linked to; a proposal that would cross an
    existing link is dropped. Leftover components are then joined by the
    shortest non-crossing segments between them.
    """
    xy = rng.random((n_nodes, 2))
    dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    np.fill_diagonal(dist, np.inf)
    links: list[tuple[int, int]] = []
    linked = np.zeros((n_nodes, n_nodes), dtype=bool)
    for _ in range(max(3 * n_nodes - 6, 1)):
        u = int(rng.integers(n_nodes))
        cand = np.where(linked[u], np.inf, dist[u])
        v = int(np.argmin(cand))
        if not math.isfinite(cand[v]) or _blocked(xy, links, u, v):
            continue
        links.append((min(u, v), max(u, v)))
        linked[u, v] = linked[v, u] = True
    _join_components(xy, dist, links, linked)
    return PlanarLayout(xy, tuple(links))


def _join_components(xy, dist, links, linked):
    n = len(xy)
    comp = _components(n, links)
    order = np.dstack(np.unravel_index(np.argsort(dist, axis=None, kind="stable"), dist.shape))[0]
    while comp.max() > 0:
        for u, v in order:
            u, v = int(u), int(v)
            if u < v and comp[u] != comp[v] and not _blocked(xy, links, u, v):
                links.append((u, v))
                linked[u, v] = linked[v, u] = True
                break
        else:
            raise AssertionError("a non-crossing joining segment always exists")
        comp = _components(n, links)


def _components(n: int, links) -> np.ndarray:
    if not links:
        return np.arange(n)
    e = np.array(links)
    g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    return connected_components(g, directed=False)[1]


def network_from_layout(layout: PlanarLayout, config: GeneratorConfig) -> Network:
    scale = config.minutes_per_unit * config.cost_per_minute
    edges = []
    for u, v in layout.links:
        c = float(np.hypot(*(layout.coords[u] - layout.coords[v]))) * scale
        edges += [(u, v, c), (v, u, c)]
    return Network([f"v{i}" for i in range(len(layout.coords))], edges)


def generate_planar(config: GeneratorConfig, rng: np.random.Generator | None = None) -> Network:
    rng = np.random.default_rng(config.seed) if rng is None else rng
    return network_from_layout(planar_layout(config.n_nodes, rng), config)


def ticket_price(sp: float, max_sp: float, config: GeneratorConfig) -> float:
    if max_sp <= 0:
        return config.base_price
    return config.base_price + config.price_slope * sp / max_sp


def generate_commodities(net: Network, config: GeneratorConfig,
                         rng: np.random.Generator | None = None) -> list[Commodity]:
    """Distinct random ordered pairs with uniform demands and distance-based tickets."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    n = net.n_nodes
    n_pairs = n * (n - 1)
    if config.n_commodities > n_pairs:
        raise ValueError(f"only {n_pairs} distinct ordered pairs, {config.n_commodities} requested")
    sp = all_pairs_distances(net, net.costs)
    finite = sp[np.isfinite(sp)]
    max_sp = float(finite.max()) if finite.size else 0.0
    picks = np.sort(rng.choice(n_pairs, config.n_commodities, replace=False))
    demands = rng.uniform(*config.demand_range, size=config.n_commodities)
    out = []
    for idx, d in zip(picks, demands):
        s, r = divmod(int(idx), n - 1)
        t = r if r < s else r + 1
        out.append(Commodity(s, t, float(d), ticket_price(float(sp[s, t]), max_sp, config)))
    return out


def generate_instance(config: GeneratorConfig, budget: float | None = None) -> Instance:
    """Network and commodities from one seeded stream; budget defaults to the first listed."""
    rng = np.random.default_rng(config.seed)
    net = generate_planar(config, rng)
    commodities = generate_commodities(net, config, rng)
    if budget is None:
        budget = config.budget_list[0] if config.budget_list else 0.0
    return make_instance(net, commodities, config.fine, budget)


def budget_sweep(inst: Instance, budgets=None) -> list[Instance]:
    budgets = default_budgets() if budgets is None else list(budgets)
    if not budgets:
        raise ValueError("need at least one budget")
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be nonnegative")
    return [inst.with_budget(float(b)) for b in budgets]


def instance_filename(tag: str, config: GeneratorConfig, budget: float) -> str:
    return f"{tag}_n{config.n_nodes}_k{config.n_commodities}_seed{config.seed}_b{budget:g}.json"


def size_class_config(name: str, seed: int = 0, **overrides) -> GeneratorConfig:
    n = SIZE_CLASSES[name]
    return replace(GeneratorConfig(n_nodes=n, n_commodities=n, seed=seed), **overrides)
