"""Transit network data model, shortest paths and JSON (de)serialization."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9


class InstanceError(ValueError):
    """Raised for malformed or invalid instance / strategy input."""


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    cost: float


class Network:
    """Directed multigraph. Nodes are named by strings and addressed by index.

    Parallel edges and self-loops are allowed; an edge is identified by its
    position in ``edges``.
    """

    def __init__(self, nodes: Sequence[str], edges: Iterable[tuple[int, int, float]]):
        self.nodes = [str(v) for v in nodes]
        if len(set(self.nodes)) != len(self.nodes):
            raise InstanceError("duplicate node identifiers")
        self._index = {v: i for i, v in enumerate(self.nodes)}
        n = len(self.nodes)
        self.edges: list[Edge] = []
        for k, (u, v, c) in enumerate(edges):
            c = float(c)
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge {k} references an unknown node")
            if not math.isfinite(c) or c < 0:
                raise InstanceError(f"edge {k} has invalid cost {c!r}")
            self.edges.append(Edge(k, int(u), int(v), c))
        self.tails = np.array([e.tail for e in self.edges], dtype=np.int64)
        self.heads = np.array([e.head for e in self.edges], dtype=np.int64)
        self.costs = np.array([e.cost for e in self.edges], dtype=float)
        self.out_edges: list[list[int]] = [[] for _ in range(n)]
        self.in_edges: list[list[int]] = [[] for _ in range(n)]
        for e in self.edges:
            self.out_edges[e.tail].append(e.id)
            self.in_edges[e.head].append(e.id)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self, name: str) -> int:
        try:
            return self._index[str(name)]
        except KeyError:
            raise InstanceError(f"unknown node {name!r}") from None

    def __repr__(self) -> str:
        return f"Network(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class Commodity:
    source: int
    target: int
    demand: float
    ticket: float


@dataclass(frozen=True)
class PathLabel:
    cost: float
    survival: float
    path: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class Instance:
    network: Network
    commodities: tuple[Commodity, ...]
    fine: float
    budget: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def with_budget(self, budget: float) -> "Instance":
        # shares the (immutable) network and cached distances
        inst = replace(self, budget=float(budget), _cache=self._cache)
        return inst

    @property
    def sp_matrix(self) -> np.ndarray:
        """All-pairs shortest path costs ``D[v, w]`` w.r.t. edge costs."""
        if "sp_matrix" not in self._cache:
            D = np.column_stack([self.sp_to(w) for w in range(self.network.n_nodes)])
            D.setflags(write=False)
            self._cache["sp_matrix"] = D
        return self._cache["sp_matrix"]

    def sp_to(self, target: int) -> np.ndarray:
        key = ("sp_to", target)
        if key not in self._cache:
            d = shortest_path_distances(self.network, self.network.costs, target)
            d.setflags(write=False)
            self._cache[key] = d
        return self._cache[key]

    def sp_cost(self, k: int) -> float:
        com = self.commodities[k]
        return float(self.sp_to(com.target)[com.source])


def validate_instance(inst: Instance) -> Instance:
    if not math.isfinite(inst.fine) or inst.fine < 0:
        raise InstanceError(f"fine must be a nonnegative number, got {inst.fine!r}")
    if not math.isfinite(inst.budget) or inst.budget < 0:
        raise InstanceError(f"budget must be a nonnegative number, got {inst.budget!r}")
    n = inst.network.n_nodes
    for k, com in enumerate(inst.commodities):
        if not (0 <= com.source < n and 0 <= com.target < n):
            raise InstanceError(f"commodity {k} references an unknown node")
        if com.source == com.target:
            raise InstanceError(f"commodity {k} has identical source and target")
        if not math.isfinite(com.demand) or com.demand < 0:
            raise InstanceError(f"commodity {k} has negative demand")
        if not math.isfinite(com.ticket) or com.ticket < 0:
            raise InstanceError(f"commodity {k} has negative ticket price")
        if com.ticket > inst.fine + TOL:
            raise InstanceError(f"ticket exceeds fine for commodity {k}")
        if not math.isfinite(inst.sp_cost(k)):
            raise InstanceError(f"commodity {k}: target is unreachable from source")
    return inst


def make_instance(network: Network, commodities: Iterable[Commodity], fine: float,
                  budget: float) -> Instance:
    inst = Instance(network, tuple(commodities), float(fine), float(budget))
    return validate_instance(inst)


# ---------------------------------------------------------------- shortest paths

def _dijkstra(n: int, adj: list[list[int]], other_end: np.ndarray, weights: np.ndarray,
              start: int) -> tuple[np.ndarray, np.ndarray]:
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    dist[start] = 0.0
    w = weights.tolist()
    ends = other_end.tolist()
    d = dist.tolist()
    pr = pred.tolist()
    done = [False] * n
    heap = [(0.0, start)]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for e in adj[u]:
            v = ends[e]
            nd = du + w[e]
            if nd < d[v]:
                d[v] = nd
                pr[v] = e
                heapq.heappush(heap, (nd, v))
    return np.array(d), np.array(pr, dtype=np.int64)


def shortest_path_distances(net: Network, weights, target: int) -> np.ndarray:
    """Exact distances from every node to ``target``; unreachable nodes get inf."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    dist, _ = _dijkstra(net.n_nodes, net.in_edges, net.tails, weights, target)
    return dist


def all_pairs_distances(net: Network, weights) -> np.ndarray:
    """``D[v, w]`` = shortest distance from v to w."""
    if net.n_nodes == 0:
        return np.zeros((0, 0))
    return np.column_stack([shortest_path_distances(net, weights, w) for w in range(net.n_nodes)])


def shortest_path_tree_to(net: Network, weights, target: int):
    """Distances to ``target`` and, per node, the first edge of a shortest path."""
    return _dijkstra(net.n_nodes, net.in_edges, net.tails, np.asarray(weights, float), target)


def shortest_path_tree_from(net: Network, weights, source: int):
    """Distances from ``source`` and, per node, the last edge of a shortest path."""
    return _dijkstra(net.n_nodes, net.out_edges, net.heads, np.asarray(weights, float), source)


def shortest_path(net: Network, weights, source: int, target: int) -> tuple[int, ...] | None:
    dist, nxt = shortest_path_tree_to(net, weights, target)
    if not math.isfinite(dist[source]):
        return None
    path = []
    v = source
    while v != target:
        e = int(nxt[v])
        path.append(e)
        v = net.edges[e].head
    return tuple(path)


def check_walk(net: Network, path: Sequence[int], source: int | None = None,
               target: int | None = None) -> None:
    m = net.n_edges
    for e in path:
        if not 0 <= e < m:
            raise ValueError(f"unknown edge id {e}")
    for a, b in zip(path, path[1:]):
        if net.edges[a].head != net.edges[b].tail:
            raise ValueError(f"edges {a} and {b} are not contiguous")
    if path:
        if source is not None and net.edges[path[0]].tail != source:
            raise ValueError("path does not start at the source")
        if target is not None and net.edges[path[-1]].head != target:
            raise ValueError("path does not end at the target")
    elif source is not None and target is not None and source != target:
        raise ValueError("empty path between distinct nodes")


def evaluate_path(net: Network, p, path: Sequence[int]) -> PathLabel:
    path = tuple(int(e) for e in path)
    check_walk(net, path)
    cost = 0.0
    surv = 1.0
    for e in path:
        cost += net.edges[e].cost
        surv *= 1.0 - float(p[e])
    return PathLabel(cost, surv, path)


def remove_cycles(net: Network, path: Sequence[int]) -> tuple[int, ...]:
    """Shortcut repeated nodes out of a walk (never raises cost or lowers survival)."""
    if not path:
        return ()
    out: list[int] = []
    pos = {net.edges[path[0]].tail: 0}  # node -> number of edges before it
    for e in path:
        v = net.edges[e].head
        if v in pos:
            k = pos[v]
            for f in out[k:]:
                del pos[net.edges[f].head]
            del out[k:]
            pos[v] = k
        else:
            out.append(e)
            pos[v] = len(out)
    return tuple(out)


# -------------------------------------------------------------------- strategies

def check_strategy(p, inst: Instance, tol: float = TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (inst.network.n_edges,):
        raise InstanceError(f"strategy has {p.size} entries, expected {inst.network.n_edges}")
    if np.any(~np.isfinite(p)) or np.any(p < -tol) or np.any(p > 1 + tol):
        raise InstanceError("inspection probabilities must lie in [0, 1]")
    if p.sum() > inst.budget + tol:
        raise InstanceError(f"strategy uses {p.sum():.12g} > budget {inst.budget:.12g}")
    return np.clip(p, 0.0, 1.0)


# ------------------------------------------------------------------------- JSON

def _parse_json(text) -> dict:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"JSON parse error at line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InstanceError("top-level JSON value must be an object")
    return data


def _field(obj: dict, key: str, where: str):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise InstanceError(f"{where}: missing field {key!r}") from None


def _number(obj: dict, key: str, where: str) -> float:
    val = _field(obj, key, where)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InstanceError(f"{where}: field {key!r} must be a number")
    return float(val)


def instance_from_dict(data: dict) -> Instance:
    nodes = _field(data, "nodes", "instance")
    if not isinstance(nodes, list):
        raise InstanceError("instance: 'nodes' must be a list")
    names = [str(v) for v in nodes]
    index = {v: i for i, v in enumerate(names)}
    raw_edges = _field(data, "edges", "instance")
    edges: dict[int, tuple[int, int, float]] = {}
    for j, e in enumerate(raw_edges):
        where = f"edge entry {j}"
        eid = _field(e, "id", where)
        if isinstance(eid, bool) or not isinstance(eid, int):
            raise InstanceError(f"{where}: 'id' must be an integer")
        if eid in edges:
            raise InstanceError(f"{where}: duplicate edge id {eid}")
        tail, head = str(_field(e, "tail", where)), str(_field(e, "head", where))
        for v in (tail, head):
            if v not in index:
                raise InstanceError(f"{where}: unknown node {v!r}")
        edges[eid] = (index[tail], index[head], _number(e, "cost", where))
    if sorted(edges) != list(range(len(edges))):
        raise InstanceError("instance: edge ids must be 0..|E|-1")
    net = Network(names, [edges[k] for k in range(len(edges))])
    coms = []
    for j, c in enumerate(_field(data, "commodities", "instance")):
        where = f"commodity {j}"
        s, t = str(_field(c, "source", where)), str(_field(c, "target", where))
        for v in (s, t):
            if v not in index:
                raise InstanceError(f"{where}: unknown node {v!r}")
        coms.append(Commodity(index[s], index[t], _number(c, "demand", where),
                              _number(c, "ticket", where)))
    return make_instance(net, coms, _number(data, "fine", "instance"),
                         _number(data, "budget", "instance"))


def instance_to_dict(inst: Instance) -> dict:
    net = inst.network
    return {
        "nodes": list(net.nodes),
        "edges": [{"id": e.id, "tail": net.nodes[e.tail], "head": net.nodes[e.head],
                   "cost": e.cost} for e in net.edges],
        "commodities": [{"source": net.nodes[c.source], "target": net.nodes[c.target],
                         "demand": c.demand, "ticket": c.ticket} for c in inst.commodities],
        "fine": inst.fine,
        "budget": inst.budget,
    }


def load_instance(text) -> Instance:
    """Parse and validate an instance from JSON text or bytes."""
    return instance_from_dict(_parse_json(text))


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def read_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())


def load_strategy(text, inst: Instance) -> np.ndarray:
    data = _parse_json(text)
    p = np.zeros(inst.network.n_edges)
    for j, item in enumerate(_field(data, "probabilities", "strategy")):
        where = f"probability entry {j}"
        e = _field(item, "edge", where)
        if isinstance(e, bool) or not isinstance(e, int) or not 0 <= e < p.size:
            raise InstanceError(f"{where}: invalid edge id {e!r}")
        p[e] = _number(item, "p", where)
    return check_strategy(p, inst)


def strategy_to_dict(p) -> dict:
    return {"probabilities": [{"edge": int(e), "p": float(v)}
                              for e, v in enumerate(np.asarray(p)) if v != 0.0]}


def dump_strategy(p) -> str:
    return json.dumps(strategy_to_dict(p), indent=1)
