"""Best responses of fare-evading passengers.

Two passenger models are supported. A *non-adaptive* passenger commits to an
s-t path P up front and pays ``c(P) + (1 - pi(P)) * F`` in expectation. An
*adaptive* passenger follows P until inspected and then finishes along a
cost-shortest path, since the fine includes a ticket.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import (TOL, Instance, Network, PathLabel, check_walk, evaluate_path,
                      remove_cycles, shortest_path, shortest_path_distances,
                      shortest_path_tree_to)

NON_ADAPTIVE = "non-adaptive"
ADAPTIVE = "adaptive"

MAX_ORACLE_NODES = 14
MAX_ORACLE_PATHS = 500_000


def follower_model(name: str) -> str:
    key = str(name).lower()
    if key in ("n", "non-adaptive", "nonadaptive", "non_adaptive"):
        return NON_ADAPTIVE
    if key in ("a", "adaptive"):
        return ADAPTIVE
    raise ValueError(f"unknown follower model {name!r}")


class OracleGuardError(RuntimeError):
    pass


@dataclass
class AdaptiveLabels:
    phi: np.ndarray        # optimal adaptive cost from each node to the target
    next_edge: np.ndarray  # first edge of an optimal path, -1 where undefined
    settled: list[int]     # nodes in the order they were settled


@dataclass
class FollowerResult:
    path: tuple[int, ...]
    value: float
    label: PathLabel
    variant: str
    frontier: list[PathLabel] = field(default_factory=list)
    labels: AdaptiveLabels | None = None


# ---------------------------------------------------------------- cost functions

def f_nonadaptive(net: Network, p, fine: float, path: Sequence[int]) -> float:
    lab = evaluate_path(net, p, path)
    return lab.cost + (1.0 - lab.survival) * fine


def f_adaptive(net: Network, p, fine: float, path: Sequence[int], target: int | None = None,
               dist_to_target: np.ndarray | None = None) -> float:
    """Expected cost of an adaptive passenger who starts out along ``path``.

    A fined passenger reroutes to ``target`` (default: the end of ``path``), so
    ``path`` may stop short of it; prefix and suffix costs then add up along
    the survival probability of the prefix.
    """
    path = tuple(int(e) for e in path)
    if target is None:
        if not path:
            raise ValueError("target is required for an empty path")
        target = net.edges[path[-1]].head
    if not 0 <= target < net.n_nodes:
        raise ValueError(f"unknown target node {target}")
    check_walk(net, path)
    if dist_to_target is None:
        dist_to_target = shortest_path_distances(net, net.costs, target)
    total = 0.0
    surv = 1.0
    for e in path:
        edge = net.edges[e]
        pe = float(p[e])
        total += surv * (edge.cost + pe * (fine + dist_to_target[edge.head]))
        surv *= 1.0 - pe
    return total


def follower_cost(inst: Instance, p, k: int, path: Sequence[int], variant: str) -> float:
    com = inst.commodities[k]
    check_walk(inst.network, path, com.source, com.target)
    if follower_model(variant) == NON_ADAPTIVE:
        return f_nonadaptive(inst.network, p, inst.fine, path)
    return f_adaptive(inst.network, p, inst.fine, path, com.target, inst.sp_to(com.target))


# ---------------------------------------------------------------------- adaptive

def adaptive_labels(net: Network, p, fine: float, target: int,
                    dist_to_target: np.ndarray) -> AdaptiveLabels:
    """Backward label setting from ``target`` over the adaptive cost.

    Among edges within ``TOL`` of the best value the one leading to the lowest
    survival probability is kept, so the unrolled path is the optimal route
    the leader prefers (largest chance of an inspection).
    """
    n = net.n_nodes
    phi = [math.inf] * n
    surv = [1.0] * n
    nxt = [-1] * n
    done = [False] * n
    order = []
    pl = np.asarray(p, dtype=float).tolist()
    cost = net.costs.tolist()
    tails = net.tails.tolist()
    dist = np.asarray(dist_to_target).tolist()
    phi[target] = 0.0
    heap = [(0.0, 1.0, target)]
    while heap:
        ph, _, w = heapq.heappop(heap)
        if done[w]:
            continue
        done[w] = True
        order.append(w)
        base = dist[w] + fine
        for e in net.in_edges[w]:
            v = tails[e]
            if done[v]:
                continue
            pe = pl[e]
            val = cost[e] + pe * base + (1.0 - pe) * ph
            sv = (1.0 - pe) * surv[w]
            if val < phi[v] - TOL:
                phi[v], surv[v], nxt[v] = val, sv, e
            elif val <= phi[v] + TOL and sv < surv[v]:
                phi[v], surv[v], nxt[v] = min(val, phi[v]), sv, e
            else:
                continue
            # equal values settle the riskier node first, so ties can route through it
            heapq.heappush(heap, (phi[v], surv[v], v))
    return AdaptiveLabels(np.array(phi), np.array(nxt, dtype=np.int64), order)


def unroll(net: Network, labels: AdaptiveLabels, source: int, target: int) -> tuple[int, ...]:
    path = []
    v = source
    while v != target:
        e = int(labels.next_edge[v])
        if e < 0:
            raise ValueError("target not reachable")
        path.append(e)
        v = net.edges[e].head
    return tuple(path)


def solve_adaptive(inst: Instance, p, k: int) -> FollowerResult:
    """Exact minimizer of the adaptive cost for commodity ``k``."""
    net = inst.network
    com = inst.commodities[k]
    labels = adaptive_labels(net, p, inst.fine, com.target, inst.sp_to(com.target))
    path = unroll(net, labels, com.source, com.target)
    return FollowerResult(path, float(labels.phi[com.source]), evaluate_path(net, p, path),
                          ADAPTIVE, labels=labels)


# ------------------------------------------------------------------ non-adaptive

def _max_survival_to(net: Network, p, target: int):
    with np.errstate(divide="ignore"):
        w = -np.log1p(-np.minimum(np.asarray(p, float), 1.0))
    return shortest_path_tree_to(net, w, target)


def solve_nonadaptive_exact(inst: Instance, p, k: int, *, prune: bool = False,
                            survival_bound=None, upper: float | None = None) -> FollowerResult:
    """Exact non-adaptive best response by Pareto label setting on (cost, survival).

    Labels are settled in order of their non-adaptive cost, which never
    decreases along an extension. With ``prune=False`` the returned frontier
    holds every nondominated (cost, survival) pair of s-t paths. With
    ``prune=True`` labels that provably cannot come within ``TOL`` of the
    optimum are discarded, so the frontier only covers the near-optimal end.
    Pruning may be given ``survival_bound`` (per node, an upper bound on the
    survival of any simple path to the target) and ``upper`` (the value of some
    s-t path); both are computed when omitted.
    """
    net = inst.network
    com = inst.commodities[k]
    s, t, F = com.source, com.target, inst.fine
    p = np.asarray(p, dtype=float)
    q = (1.0 - p).tolist()
    cost = net.costs.tolist()
    heads = net.heads.tolist()

    lc, ls, lnode, lpred, ledge, alive = [0.0], [1.0], [s], [-1], [-1], [True]
    at: list[list[int]] = [[] for _ in range(net.n_nodes)]
    at[s].append(0)
    heap = [(0.0, 0.0, 0)]

    if prune and survival_bound is not None and upper is not None:
        dist_c = inst.sp_to(t).tolist()
        pimax = np.asarray(survival_bound, float).tolist()
        ub = float(upper)
    elif prune:
        dist_c = inst.sp_to(t).tolist()
        dw, nxt = _max_survival_to(net, p, t)
        pimax = np.exp(-dw).tolist()
        ub = f_nonadaptive(net, p, F, shortest_path(net, net.costs, s, t))
        if math.isfinite(dw[s]):
            safest = []
            v = s
            while v != t:
                safest.append(int(nxt[v]))
                v = net.edges[safest[-1]].head
            ub = min(ub, f_nonadaptive(net, p, F, safest))
    best = math.inf

    while heap:
        key, c0, lid = heapq.heappop(heap)
        if not alive[lid]:
            continue
        if prune and key > best + TOL:
            break
        v = lnode[lid]
        if v == t:
            best = min(best, key)
            continue
        s0 = ls[lid]
        for e in net.out_edges[v]:
            w = heads[e]
            nc = c0 + cost[e]
            ns = s0 * q[e]
            if prune and nc + dist_c[w] + F * (1.0 - ns * pimax[w]) > ub + TOL:
                continue
            bucket = at[w]
            dominated = False
            for j in bucket:
                if lc[j] <= nc and ls[j] >= ns:
                    dominated = True
                    break
            if dominated:
                continue
            keep = []
            for j in bucket:
                if nc <= lc[j] and ns >= ls[j]:
                    alive[j] = False
                else:
                    keep.append(j)
            nid = len(lc)
            lc.append(nc)
            ls.append(ns)
            lnode.append(w)
            lpred.append(lid)
            ledge.append(e)
            alive.append(True)
            keep.append(nid)
            at[w] = keep
            fval = nc + F * (1.0 - ns)
            if prune and w == t and fval < ub:
                ub = fval
            heapq.heappush(heap, (fval, nc, nid))

    def path_of(lid: int) -> tuple[int, ...]:
        out = []
        while ledge[lid] >= 0:
            out.append(ledge[lid])
            lid = lpred[lid]
        return tuple(reversed(out))

    frontier = sorted((PathLabel(lc[j], ls[j], path_of(j)) for j in at[t]),
                      key=lambda lab: (lab.cost, -lab.survival, lab.path))
    if not frontier:
        raise ValueError(f"commodity {k}: target unreachable")
    best_lab = min(frontier, key=lambda lab: (lab.cost + F * (1.0 - lab.survival), lab.cost))
    value = best_lab.cost + F * (1.0 - best_lab.survival)
    return FollowerResult(best_lab.path, value, best_lab, NON_ADAPTIVE, frontier=frontier)


# --------------------------------------------------------------------- FPTAS

def _scaled_survival_dp(net: Network, usable: np.ndarray, w: np.ndarray, scaled: np.ndarray,
                        levels: int, source: int):
    """Min total ``w`` from ``source`` to each node with scaled cost <= b, for all b.

    Vectorized Bellman-Ford over the cost levels. Returns the value table and
    predecessor edges, both of shape (levels + 1, n).
    """
    n = net.n_nodes
    G = np.full((levels + 1, n), np.inf)
    G[:, source] = 0.0
    pred = np.full((levels + 1, n), -1, dtype=np.int64)
    edges = [e for e in np.flatnonzero(usable) if scaled[e] <= levels]
    tails, heads = net.tails, net.heads
    for _ in range(n):
        changed = False
        for e in edges:
            ce = int(scaled[e])
            u, v = tails[e], heads[e]
            if u == v:
                continue
            cand = G[:levels + 1 - ce, u] + w[e]
            cur = G[ce:, v]
            better = cand < cur
            if better.any():
                idx = np.flatnonzero(better) + ce
                G[idx, v] = cand[better]
                pred[idx, v] = e
                changed = True
        if not changed:
            break
    return G, pred


def _dp_path(net: Network, pred: np.ndarray, scaled: np.ndarray, level: int, source: int,
             target: int) -> tuple[int, ...] | None:
    path = []
    v, b = target, level
    for _ in range(pred.size + 1):
        if v == source and pred[b, v] < 0:
            return remove_cycles(net, tuple(reversed(path)))
        e = int(pred[b, v])
        if e < 0:
            return None
        path.append(e)
        b -= int(scaled[e])
        v = int(net.tails[e])
    raise RuntimeError("predecessor chain does not terminate")


MAX_DP_CELLS = 4_000_000


def solve_nonadaptive_fptas(inst: Instance, p, k: int, epsilon: float) -> FollowerResult:
    """(1 + epsilon)-approximate non-adaptive best response.

    For geometrically spaced cost thresholds C, a cost-scaled dynamic program
    finds a path of cost at most (1 + eps') C whose survival probability is at
    least that of every path with cost at most C; the best candidate under the
    non-adaptive cost is returned. The inner precision eps' satisfies
    (1 + eps')**2 = 1 + epsilon.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    net = inst.network
    com = inst.commodities[k]
    s, t, F = com.source, com.target, inst.fine
    p = np.asarray(p, dtype=float)
    n = net.n_nodes
    eps1 = math.sqrt(1.0 + epsilon) - 1.0

    # Paths through an edge with p_e = 1 have survival 0; among them and all
    # other paths, the cost-shortest path is the best survival-0 candidate.
    candidates = [shortest_path(net, net.costs, s, t)]
    usable = p < 1.0
    with np.errstate(divide="ignore"):
        w = np.where(usable, -np.log1p(-np.where(usable, p, 0.0)), np.inf)

    costs = net.costs
    zero = usable & (costs == 0)
    if zero.any():
        cand = shortest_path(net, np.where(zero, w, np.inf), s, t)
        if cand is not None:
            candidates.append(cand)

    positive = usable & (costs > 0)
    sp = inst.sp_cost(k)
    if positive.any():
        c_lo = sp if sp > 0 else float(costs[positive].min())
        c_hi = min((n - 1) * float(costs[usable].max()), sp + F)
        c_hi = max(c_hi, c_lo)
        n_thr = int(math.ceil(math.log(c_hi / c_lo) / math.log1p(eps1) - 1e-12))
        thresholds = [c_lo * (1.0 + eps1) ** i for i in range(max(n_thr, 0) + 1)]
        # one shared grid, fine enough for the smallest threshold
        delta = eps1 * thresholds[0] / n
        top = int(math.floor(thresholds[-1] / delta))
        if (top + 1) * n <= MAX_DP_CELLS:
            groups = [(delta, thresholds)]
        else:
            groups = [(eps1 * C / n, [C]) for C in thresholds]
        for delta, thr in groups:
            scaled = np.floor(np.where(usable, costs, 0.0) / delta).astype(np.int64)
            top = int(math.floor(thr[-1] / delta))
            G, pred = _scaled_survival_dp(net, usable, w, scaled, top, s)
            seen = set()
            for C in thr:
                b = min(int(math.floor(C / delta)), top)
                if b in seen or not math.isfinite(G[b, t]):
                    continue
                seen.add(b)
                cand = _dp_path(net, pred, scaled, b, s, t)
                if cand is not None:
                    candidates.append(cand)

    best = None
    for cand in candidates:
        if cand is None:
            continue
        val = f_nonadaptive(net, p, F, cand)
        if best is None or val < best[0] - 1e-15:
            best = (val, cand)
    if best is None:
        raise ValueError(f"commodity {k}: target unreachable")
    val, path = best
    return FollowerResult(path, val, evaluate_path(net, p, path), NON_ADAPTIVE)


# ------------------------------------------------------------------ brute force

def enumerate_simple_paths(net: Network, source: int, target: int,
                           limit: int | None = None):
    """Yield every simple source-target path as a tuple of edge ids (DFS order)."""
    count = 0
    visited = [False] * net.n_nodes
    visited[source] = True
    stack = [(source, iter(net.out_edges[source]))]
    path: list[int] = []
    while stack:
        v, it = stack[-1]
        e = next(it, None)
        if e is None:
            stack.pop()
            visited[v] = False
            if path:
                path.pop()
            continue
        w = net.edges[e].head
        if visited[w]:
            continue
        if w == target:
            count += 1
            if limit is not None and count > limit:
                raise OracleGuardError(f"more than {limit} simple paths")
            yield tuple(path) + (e,)
            continue
        visited[w] = True
        path.append(e)
        stack.append((w, iter(net.out_edges[w])))


def brute_force_oracle(inst: Instance, p, k: int, variant: str) -> FollowerResult:
    """Minimum of the follower cost over all simple s-t paths (test oracle)."""
    model = follower_model(variant)
    net = inst.network
    com = inst.commodities[k]
    limit = None if net.n_nodes <= MAX_ORACLE_NODES else MAX_ORACLE_PATHS
    dist = inst.sp_to(com.target)
    best = None
    for path in enumerate_simple_paths(net, com.source, com.target, limit):
        if model == NON_ADAPTIVE:
            val = f_nonadaptive(net, p, inst.fine, path)
        else:
            val = f_adaptive(net, p, inst.fine, path, com.target, dist)
        if best is None or val < best[0]:
            best = (val, path)
    if best is None:
        raise ValueError(f"commodity {k}: target unreachable")
    val, path = best
    return FollowerResult(path, val, evaluate_path(net, p, path), model)
