"""Directed multicuts separating every commodity pair, used as a local-search start."""

from __future__ import annotations

from collections import deque

import numpy as np

from .network import Instance, Network, shortest_path

EXACT_EDGE_LIMIT = 25


def _bfs_path(net: Network, cut: set[int], source: int, target: int) -> list[int] | None:
    pred = {source: None}
    todo = deque([source])
    while todo:
        v = todo.popleft()
        if v == target:
            path = []
            while pred[v] is not None:
                e = pred[v]
                path.append(e)
                v = net.edges[e].tail
            return path[::-1]
        for e in net.out_edges[v]:
            w = net.edges[e].head
            if e not in cut and w not in pred:
                pred[w] = e
                todo.append(w)
    return None


def _uncut(net: Network, cut: set[int], pairs) -> tuple[int, list[int]] | None:
    for i, (s, t) in enumerate(pairs):
        path = _bfs_path(net, cut, s, t)
        if path is not None:
            return i, path
    return None


def is_multicut(net: Network, cut, pairs) -> bool:
    return _uncut(net, set(cut), pairs) is None


def _exact(net: Network, pairs) -> list[int]:
    # iterative deepening; every multicut must hit each surviving path
    def search(cut: set[int], left: int) -> set[int] | None:
        hit = _uncut(net, cut, pairs)
        if hit is None:
            return cut
        if left == 0:
            return None
        for e in hit[1]:
            found = search(cut | {e}, left - 1)
            if found is not None:
                return found
        return None

    for size in range(net.n_edges + 1):
        found = search(set(), size)
        if found is not None:
            return sorted(found)
    raise AssertionError("cutting every edge always separates")


def _greedy(net: Network, pairs) -> list[int]:
    cut: set[int] = set()
    order: list[int] = []
    while True:
        weights = np.where(np.isin(np.arange(net.n_edges), list(cut)), np.inf, net.costs)
        counts = np.zeros(net.n_edges, dtype=int)
        for s, t in pairs:
            path = shortest_path(net, weights, s, t)
            if path is not None:
                counts[list(path)] += 1
        if not counts.any():
            break
        e = int(np.argmax(counts))
        cut.add(e)
        order.append(e)
    for e in reversed(order):
        if is_multicut(net, cut - {e}, pairs):
            cut.discard(e)
    return sorted(cut)


def minimum_multicut(net: Network, pairs, exact_limit: int = EXACT_EDGE_LIMIT) -> list[int]:
    """Edge ids whose removal disconnects every (source, target) pair.

    Minimum cardinality when the network has at most ``exact_limit`` edges,
    greedy (most shortest paths hit first, then redundant edges dropped) otherwise.
    """
    pairs = [(int(s), int(t)) for s, t in pairs]
    if not pairs:
        return []
    if net.n_edges <= exact_limit:
        return _exact(net, pairs)
    return _greedy(net, pairs)


def multicut_start(inst: Instance, exact_limit: int = EXACT_EDGE_LIMIT) -> np.ndarray:
    """Spread the budget uniformly over a multicut, capped at 1 per edge."""
    pairs = [(c.source, c.target) for c in inst.commodities]
    cut = minimum_multicut(inst.network, pairs, exact_limit)
    p = np.zeros(inst.network.n_edges)
    if cut:
        p[cut] = min(1.0, inst.budget / len(cut))
    return p
