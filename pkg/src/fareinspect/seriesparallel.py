"""Two-terminal series-parallel decomposition and the exact non-adaptive solver on it."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Union

import numpy as np

from .followers import NON_ADAPTIVE, FollowerResult
from .network import TOL, Instance, Network, evaluate_path


@dataclass(frozen=True)
class Leaf:
    edge: int


@dataclass(frozen=True)
class Series:
    first: "SPTree"   # part incident to the source
    second: "SPTree"


@dataclass(frozen=True)
class Parallel:
    first: "SPTree"
    second: "SPTree"


SPTree = Union[Leaf, Series, Parallel]


class NotSeriesParallel(ValueError):
    def __init__(self, message: str, witness: list[tuple[str, str]]):
        super().__init__(message)
        self.witness = witness


def tree_edges(tree: SPTree) -> list[int]:
    out, stack = [], [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.append(node.edge)
        else:
            stack.extend((node.second, node.first))
    return out


def _reach(n: int, adj: list[list[int]], ends, start: int, blocked: int) -> list[bool]:
    seen = [False] * n
    seen[start] = True
    todo = deque([start])
    while todo:
        v = todo.popleft()
        if v == blocked and v != start:
            continue
        for e in adj[v]:
            w = int(ends[e])
            if not seen[w]:
                seen[w] = True
                todo.append(w)
    return seen


def relevant_edges(net: Network, source: int, target: int) -> list[int]:
    """Edges on some source-target walk that neither leaves the target nor enters the source."""
    fwd = _reach(net.n_nodes, net.out_edges, net.heads, source, target)
    bwd = _reach(net.n_nodes, net.in_edges, net.tails, target, source)
    return [e.id for e in net.edges
            if fwd[e.tail] and bwd[e.head] and e.tail != target and e.head != source]


def sp_decompose(net: Network, source: int, target: int) -> SPTree:
    """Decompose the source-target subgraph by exhaustive series/parallel reduction.

    Raises NotSeriesParallel carrying the irreducible remainder as witness.
    """
    if source == target:
        raise NotSeriesParallel("source equals target", [])
    edges = relevant_edges(net, source, target)
    if not edges:
        raise NotSeriesParallel("target not reachable from source", [])
    # super-edges: id -> (tail, head, tree); ids keep the smallest original edge id
    sup: dict[int, tuple[int, int, SPTree]] = {e: (net.edges[e].tail, net.edges[e].head, Leaf(e))
                                               for e in edges}
    changed = True
    while changed:
        changed = False
        groups: dict[tuple[int, int], list[int]] = {}
        for key in sorted(sup):
            u, v, _ = sup[key]
            groups.setdefault((u, v), []).append(key)
        for (u, v), keys in groups.items():
            if len(keys) > 1:
                tree = sup[keys[0]][2]
                for other in keys[1:]:
                    tree = Parallel(tree, sup.pop(other)[2])
                sup[keys[0]] = (u, v, tree)
                changed = True
        inc: dict[int, list[int]] = {}
        out: dict[int, list[int]] = {}
        for key, (u, v, _) in sup.items():
            out.setdefault(u, []).append(key)
            inc.setdefault(v, []).append(key)
        for x in sorted(set(inc) | set(out)):
            if x in (source, target):
                continue
            ins, outs = inc.get(x, []), out.get(x, [])
            if len(ins) == 1 and len(outs) == 1 and ins[0] != outs[0]:
                a, b = ins[0], outs[0]
                if a not in sup or b not in sup:
                    continue
                ua, _, ta = sup[a]
                _, vb, tb = sup[b]
                if ua == x or vb == x:
                    continue
                sup.pop(a)
                sup.pop(b)
                sup[min(a, b)] = (ua, vb, Series(ta, tb))
                changed = True
                break
    if len(sup) == 1:
        (u, v, tree), = sup.values()
        if u == source and v == target:
            return tree
    witness = sorted((net.nodes[u], net.nodes[v]) for u, v, _ in sup.values())
    raise NotSeriesParallel(f"not series-parallel between {net.nodes[source]!r} and "
                            f"{net.nodes[target]!r}; irreducible part has {len(witness)} arcs",
                            witness)


@dataclass
class _Cand:
    path: tuple[int, ...]
    cost: float
    surv: float
    lo: float
    hi: float


def _bound(dc: float, ds: float, surv: float, fine: float) -> float:
    if fine == 0:
        return np.inf
    return dc / ds * surv / fine


def find_paths(tree: SPTree, net: Network, p, fine: float) -> list[_Cand]:
    """Candidate paths with survival intervals, computed bottom-up over the tree."""
    if isinstance(tree, Leaf):
        e = tree.edge
        return [_Cand((e,), net.edges[e].cost, 1.0 - float(p[e]), 0.0, 1.0)]
    left = find_paths(tree.first, net, p, fine)
    right = find_paths(tree.second, net, p, fine)
    if isinstance(tree, Series):
        out = []
        for a in left:
            for b in right:
                lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
                if lo <= hi + TOL:
                    out.append(_Cand(a.path + b.path, a.cost + b.cost, a.surv * b.surv, lo, hi))
        return out
    merged = sorted(left + right, key=lambda c: (c.cost, -c.surv, c.path))
    kept: list[_Cand] = []
    for c in merged:
        if not kept or c.surv > kept[-1].surv:
            kept.append(c)
    for c in kept:
        c.lo, c.hi = 0.0, 1.0
        for o in kept:
            if o is c:
                continue
            if c.cost <= o.cost:
                # cheaper but riskier than o
                c.hi = min(c.hi, _bound(c.cost - o.cost, c.surv - o.surv, c.surv, fine))
            else:
                c.lo = max(c.lo, _bound(c.cost - o.cost, c.surv - o.surv, c.surv, fine))
    return kept


def solve_nonadaptive_sp(inst: Instance, p, k: int, tree: SPTree | None = None) -> FollowerResult:
    """Exact non-adaptive best response on a two-terminal series-parallel commodity graph."""
    net = inst.network
    com = inst.commodities[k]
    if tree is None:
        tree = sp_decompose(net, com.source, com.target)
    cands = find_paths(tree, net, np.asarray(p, float), inst.fine)
    F = inst.fine
    best = min(cands, key=lambda c: (c.cost + F * (1.0 - c.surv), c.path))
    lab = evaluate_path(net, p, best.path)
    return FollowerResult(best.path, lab.cost + F * (1.0 - lab.survival), lab, NON_ADAPTIVE)
