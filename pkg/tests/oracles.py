"""Independent reference computations used by the tests.

Everything here works from first principles (explicit path lists, direct
formula evaluation, grids) and shares no code with the solvers under test.
"""

from __future__ import annotations

import math

import numpy as np


def simple_paths(edges, n, s, t):
    """All simple s-t paths of an edge list [(u, v, c), ...] as edge-id tuples."""
    out = []
    adj = [[] for _ in range(n)]
    for i, (u, v, _) in enumerate(edges):
        adj[u].append((i, v))

    def dfs(v, seen, path):
        if v == t:
            out.append(tuple(path))
            return
        for i, w in adj[v]:
            if w not in seen:
                seen.add(w)
                path.append(i)
                dfs(w, seen, path)
                path.pop()
                seen.discard(w)

    dfs(s, {s}, [])
    return out


def dist_matrix(edges, n):
    """Floyd-Warshall on costs."""
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for u, v, c in edges:
        D[u, v] = min(D[u, v], c)
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


def f_n(edges, p, F, path):
    c = sum(edges[e][2] for e in path)
    pi = math.prod(1 - p[e] for e in path)
    return c + (1 - pi) * F


def f_a(edges, p, F, path, D, t):
    total, alive = 0.0, 1.0
    for e in path:
        u, v, c = edges[e]
        total += alive * (c + p[e] * (F + D[v, t]))
        alive *= 1 - p[e]
    return total


def survival(p, path):
    return math.prod(1 - p[e] for e in path)


def revenue_by_definition(edges, n, p, F, com, variant, D=None):
    """Per-passenger revenue straight from the fixed/flexible fare definitions.

    ``com`` = (s, t, demand, ticket); ``variant`` like "fix-n".
    Adaptive fixed fares resolve evasion ties by the largest fine revenue.
    """
    s, t, _, T = com
    D = dist_matrix(edges, n) if D is None else D
    paths = simple_paths(edges, n, s, t)
    f = f_n if variant.endswith("n") else (lambda E, P, F_, q: f_a(E, P, F_, q, D, t))
    vals = [f(edges, p, F, q) for q in paths]
    sp = D[s, t]
    if variant.startswith("flex"):
        return min(vals) - sp
    options = [(v, F * (1 - survival(p, q))) for v, q in zip(vals, paths)]
    options.append((sp + T, T))
    m = min(v for v, _ in options)
    return max(r for v, r in options if v <= m + 1e-9)


def grid_points(m, step, budget, dims=None):
    """All points of the step-grid in [0,1]^m with coordinate sum <= budget."""
    ticks = np.round(np.arange(0, 1 + step / 2, step), 12)
    dims = range(m) if dims is None else dims
    axes = [ticks if i in dims else np.zeros(1) for i in range(m)]
    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(m, -1).T
    return grid[grid.sum(axis=1) <= budget + 1e-9]


def profit_on_grid(edges, n, commodities, F, P, variant):
    """Vectorized leader profit for each row of the strategy matrix ``P``."""
    D = dist_matrix(edges, n)
    cost = np.array([c for _, _, c in edges])
    total = np.zeros(len(P))
    for s, t, d, T in commodities:
        sp = D[s, t]
        vals, revs = [], []
        for q in simple_paths(edges, n, s, t):
            idx = list(q)
            surv = np.prod(1 - P[:, idx], axis=1)
            if variant.endswith("n"):
                val = cost[idx].sum() + F * (1 - surv)
            else:
                val = np.zeros(len(P))
                alive = np.ones(len(P))
                for e in idx:
                    head = edges[e][1]
                    val += alive * (cost[e] + P[:, e] * (F + D[head, t]))
                    alive *= 1 - P[:, e]
            vals.append(val)
            revs.append(F * (1 - surv))
        vals = np.array(vals)
        best = vals.min(axis=0)
        if variant.startswith("flex"):
            total += d * (best - sp)
            continue
        m = np.minimum(best, sp + T)
        gamma = np.where(sp + T <= m + 1e-9, T, -np.inf)
        for v, r in zip(vals, revs):
            gamma = np.maximum(gamma, np.where(v <= m + 1e-9, r, -np.inf))
        total += d * gamma
    return total


def lp_value_on_grid(edges, n, commodities, F, P, caps=None):
    """Relaxation objective sum_i d_i min(min_P sum(c + F p) - SP, cap_i) per grid row."""
    D = dist_matrix(edges, n)
    cost = np.array([c for _, _, c in edges])
    total = np.zeros(len(P))
    for i, (s, t, d, T) in enumerate(commodities):
        best = np.full(len(P), np.inf)
        for q in simple_paths(edges, n, s, t):
            idx = list(q)
            best = np.minimum(best, cost[idx].sum() + F * P[:, idx].sum(axis=1))
        cap = F if caps is None else caps[i]
        total += d * np.minimum(best - D[s, t], cap)
    return total


def segments_cross(p1, p2, p3, p4):
    """Proper crossing test for two segments (shared endpoints do not count)."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def any_crossing(coords, links):
    """All-pairs proper crossing check, one link against the rest at a time."""
    xy = np.asarray(coords, dtype=float)
    e = np.asarray(links, dtype=int).reshape(-1, 2)
    a, b = xy[e[:, 0]], xy[e[:, 1]]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
            (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])
    for i in range(len(e) - 1):
        j = slice(i + 1, None)
        disjoint = ~np.isin(e[j], e[i]).any(axis=1)
        d1, d2 = orient(a[j], b[j], a[i]), orient(a[j], b[j], b[i])
        d3, d4 = orient(a[i], b[i], a[j]), orient(a[i], b[i], b[j])
        if np.any(disjoint & (d1 * d2 < 0) & (d3 * d4 < 0)):
            return True
    return False
