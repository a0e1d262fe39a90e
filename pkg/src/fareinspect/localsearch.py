"""Probability-shifting local search over a fixed support set."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .followers import ADAPTIVE, adaptive_labels
from .leader import (FLEXIBLE, CommodityRevenue, LeaderSolution, RelaxationSolution, VariantId,
                     _adaptive_option, _decide, _nonadaptive_options, evaluate_profit)
from .network import TOL, Instance, check_strategy, shortest_path_tree_from

SUPPORT_TOL = 1e-6


@dataclass(frozen=True)
class LocalSearchConfig:
    k: int = 1
    delta0: float = 0.1
    decay: float = 0.9
    max_iterations: int = 30
    stall_threshold: float = 1e-6
    stall_patience: int = 5
    seed: int = 0
    max_moves: int = 20_000   # k > 1 only: larger move sets are sampled with ``seed``

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if self.max_iterations < 0 or self.stall_patience < 1:
            raise ValueError("iteration limits must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "LocalSearchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown local-search settings: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text) -> "LocalSearchConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)


def support_set(artifact, tol: float = SUPPORT_TOL) -> list[int]:
    """Edges carrying probability above ``tol`` in a relaxation or a strategy."""
    p = artifact.probabilities if isinstance(artifact, RelaxationSolution) else artifact
    return [int(e) for e in np.flatnonzero(np.asarray(p, float) > tol)]


def _shift(p: np.ndarray, minus, plus, delta: float) -> tuple[np.ndarray, float]:
    """Move up to ``delta`` from ``minus`` to ``plus``, levelled so bounds hold."""
    minus, plus = list(minus), list(plus)
    amount = min(delta, float(p[minus].sum()), float((1.0 - p[plus]).sum()))
    q = p.copy()
    if amount <= 1e-12:
        return q, 0.0
    q[minus] -= _level(p[minus], amount)
    q[plus] += _level(1.0 - p[plus], amount)
    q[minus] = np.maximum(q[minus], 0.0)
    q[plus] = np.minimum(q[plus], 1.0)
    return q, amount


def _level(room: np.ndarray, amount: float) -> np.ndarray:
    # equal shares, capped by each entry's room, with the remainder refilled
    take = np.zeros_like(room)
    left = amount
    open_ = room > 0
    while left > 1e-15 and open_.any():
        share = left / open_.sum()
        step = np.where(open_, np.minimum(share, room - take), 0.0)
        take += step
        left -= step.sum()
        open_ = room - take > 1e-15
    return take


class _Evaluator:
    """Per-commodity responses at the current strategy plus an exact change filter."""

    def __init__(self, inst: Instance, variant: VariantId, epsilon: float | None = None):
        self.inst = inst
        self.variant = variant
        self.epsilon = epsilon if variant.followers != ADAPTIVE else None
        self.demand = np.array([c.demand for c in inst.commodities])
        self.src = np.array([c.source for c in inst.commodities], dtype=np.int64)
        self.dst = np.array([c.target for c in inst.commodities], dtype=np.int64)
        self.sp = inst.sp_matrix
        self.rows: list[CommodityRevenue] = []
        self.cache: dict = {}

    def solve(self, q: np.ndarray, ks, lowered=()) -> dict[int, CommodityRevenue]:
        """Responses at ``q``; ``lowered`` lists the edges whose probability dropped
        relative to the current strategy (raised edges need no mention)."""
        inst, variant = self.inst, self.variant
        out = {}
        if variant.followers == ADAPTIVE:
            groups: dict[int, list[int]] = {}
            for k in ks:
                groups.setdefault(inst.commodities[k].target, []).append(k)
            for t, members in groups.items():
                labels = adaptive_labels(inst.network, q, inst.fine, t, inst.sp_to(t))
                for k in members:
                    opt = _adaptive_option(inst, q, labels, inst.commodities[k])
                    out[k] = _decide(inst, k, variant, [opt], inst.sp_cost(k), routes=False)
            return out
        for k in ks:
            if self.epsilon is not None:
                options = _nonadaptive_options(inst, q, k, self.epsilon)
            else:
                hints = self._hints(q, k, lowered) if self.rows and len(lowered) < 2 else {}
                options = _nonadaptive_options(inst, q, k, None, **hints)
            out[k] = _decide(inst, k, variant, options, inst.sp_cost(k), routes=False)
        return out

    def _hints(self, q: np.ndarray, k: int, lowered) -> dict:
        # a simple path uses the one lowered edge at most once
        t = self.dst[k]
        bound = self.pimax[:, t]
        for a in lowered:
            e = self.inst.network.edges[a]
            via = self.pimax[:, e.tail] * (1.0 - q[a]) * self.pimax[e.head, t]
            bound = np.maximum(bound, via)
        path = list(self.rows[k].evade_path)
        upper = self.inst.network.costs[path].sum() + self.inst.fine * (1.0 - np.prod(1.0 - q[path]))
        return {"survival_bound": bound, "upper": float(upper)}

    def single(self, side: str, e: int, amount: float, ks) -> dict[int, CommodityRevenue]:
        """Responses after moving only edge ``e`` up ('+') or down ('-') by ``amount``;
        memoized until the next reset."""
        key = (side, e, amount)
        memo = self.cache.setdefault(key, {})
        missing = [k for k in ks if k not in memo]
        if missing:
            q = self.p.copy()
            q[e] = min(q[e] + amount, 1.0) if side == "+" else max(q[e] - amount, 0.0)
            memo.update(self.solve(q, missing, lowered=(e,) if side == "-" else ()))
        return {k: memo[k] for k in ks}

    def reset(self, p: np.ndarray, rows: list[CommodityRevenue]):
        self.p = p
        self.rows = rows
        self.cache = {}
        self.gamma = np.array([r.gamma for r in rows])
        self.profit = float(self.demand @ self.gamma) if rows else 0.0
        self.mins = np.array([r.min_value for r in rows])
        self.on_path: dict[int, list[int]] = {}
        for k, r in enumerate(rows):
            if r.evade_value <= r.min_value + TOL:
                for e in sorted(set(r.evade_path)):
                    self.on_path.setdefault(e, []).append(k)
        net = self.inst.network
        with np.errstate(divide="ignore"):
            w = -np.log1p(-np.minimum(p, 1.0))
        self.pimax = np.exp(-np.array([shortest_path_tree_from(net, w, v)[0]
                                       for v in range(net.n_nodes)]))

    def raised(self, b: int) -> list[int]:
        """Commodities whose revenue may change when p_b increases."""
        return self.on_path.get(b, [])

    def lowered(self, a: int, new_pa: float) -> list[int]:
        """Commodities whose revenue may change when p_a drops to ``new_pa``."""
        if not self.rows:
            return []
        return [int(k) for k in np.flatnonzero(self.through_bound(a, new_pa) <= self.mins + TOL)]

    def through_bound(self, a: int, new_pa: float) -> np.ndarray:
        """Per commodity, a lower bound on the follower cost of any route using edge ``a``
        once p_a drops to ``new_pa`` (other probabilities may only grow)."""
        key = ("through", a, new_pa)
        if key not in self.cache:
            e = self.inst.network.edges[a]
            F = self.inst.fine
            through = self.sp[self.src, e.tail] + e.cost + self.sp[e.head, self.dst]
            surv = (1.0 - new_pa) * self.pimax[self.src, e.tail] * self.pimax[e.head, self.dst]
            if self.variant.followers == ADAPTIVE:
                top = self.sp[self.src, self.dst] + F
                with np.errstate(invalid="ignore"):
                    mixed = (1.0 - surv) * top + surv * through
                bound = np.minimum(top, np.where(np.isfinite(through), mixed, np.inf))
            else:
                bound = through + F * (1.0 - surv)
            self.cache[key] = bound
        return self.cache[key]

    def change(self, rows: dict[int, CommodityRevenue]) -> float:
        return float(sum(self.demand[k] * (r.gamma - self.gamma[k]) for k, r in rows.items()))


def local_search(inst: Instance, variant, start, support=None,
                 config: LocalSearchConfig | None = None, *, upper_bound: float = math.nan,
                 start_name: str = "start", epsilon: float | None = None) -> LeaderSolution:
    """Shift inspection mass between support edges while the leader's profit improves.

    Each iteration evaluates every move of up to ``k`` edges losing and up to ``k``
    edges gaining mass, applies the best improving one and shrinks the step.
    ``epsilon`` answers non-adaptive followers with the approximation scheme
    instead of the exact solver (every move is then evaluated in full).
    """
    variant = VariantId.parse(variant)
    config = config or LocalSearchConfig()
    p = check_strategy(start, inst).copy()
    if support is None:
        support = support_set(p)
    support = sorted({int(e) for e in support} | set(support_set(p)))
    ev = _Evaluator(inst, variant, epsilon)
    solved = ev.solve(p, range(len(inst.commodities)))
    ev.reset(p, [solved[k] for k in range(len(inst.commodities))])
    history = [ev.profit]
    rng = np.random.default_rng(config.seed)
    delta = config.delta0
    stalled = 0
    iterations = 0
    for it in range(config.max_iterations):
        iterations = it + 1
        best_q, best_minus, best_profit = None, (), ev.profit
        for minus, plus in _moves(support, config, rng):
            if config.k == 1:
                # cheap scalar pre-check; _shift would return the same amount
                amount = min(delta, ev.p[minus[0]], 1.0 - ev.p[plus[0]])
                if amount <= 1e-12:
                    continue
                q = None
            else:
                q, amount = _shift(ev.p, minus, plus, delta)
                if amount == 0.0:
                    continue
            beat = best_profit + TOL * max(1.0, abs(best_profit))
            profit = _move_profit(ev, q, minus, plus, amount, beat)
            if profit > beat:
                if q is None:
                    q = _shift(ev.p, minus, plus, delta)[0]
                best_q, best_minus, best_profit = q, tuple(minus), profit
        before = ev.profit
        if best_q is not None:
            solved = ev.solve(best_q, range(len(inst.commodities)), lowered=best_minus)
            rows = [solved[k] for k in range(len(inst.commodities))]
            total = float(ev.demand @ np.array([r.gamma for r in rows]))
            if total > before:
                ev.reset(best_q, rows)
        history.append(ev.profit)
        delta *= config.decay
        gain = (ev.profit - before) / max(abs(before), 1e-12)
        stalled = stalled + 1 if gain < config.stall_threshold else 0
        if stalled >= config.stall_patience:
            break
    final = evaluate_profit(inst, ev.p, variant, epsilon=ev.epsilon)
    return LeaderSolution(ev.p, variant, final, upper_bound, f"local-search({start_name})",
                          iterations, history)


def _moves(support, config: LocalSearchConfig, rng):
    if config.k == 1:
        for a in support:
            for b in support:
                if a != b:
                    yield (a,), (b,)
        return
    sizes = range(1, config.k + 1)
    moves = []
    for r in sizes:
        for minus in itertools.combinations(support, r):
            rest = [e for e in support if e not in minus]
            for s in sizes:
                moves.extend((minus, plus) for plus in itertools.combinations(rest, s))
                if len(moves) > 50 * config.max_moves:
                    break
    if len(moves) > config.max_moves:
        pick = np.sort(rng.choice(len(moves), config.max_moves, replace=False))
        moves = [moves[i] for i in pick]
    yield from moves


def _move_profit(ev: _Evaluator, q: np.ndarray, minus, plus, amount: float,
                 beat: float) -> float:
    """Profit after the move, or a value <= ``beat`` once it provably cannot exceed it."""
    if len(minus) > 1 or len(plus) > 1 or ev.epsilon is not None:
        if q is None:
            q = _shift(ev.p, minus, plus, amount)[0]
        rows = ev.solve(q, range(len(ev.rows)), lowered=tuple(minus))
        return ev.profit + ev.change(rows)
    (a,), (b,) = minus, plus
    new_pa = max(ev.p[a] - amount, 0.0)
    up = ev.raised(b)
    down = ev.lowered(a, new_pa)
    if not up and not down:
        return ev.profit
    if ev.variant.fares == FLEXIBLE and up:
        # revenue is monotone in p: raising b alone bounds the move from above
        if ev.profit + ev.change(ev.single("+", b, amount, up)) <= beat:
            return beat
    joint = set(up) & set(down)
    rows = {}
    # raising b lifts a commodity's optimum, which may let a route through a win
    bound = ev.through_bound(a, new_pa)
    for k, r in ev.single("+", b, amount, [k for k in up if k not in joint]).items():
        if bound[k] <= r.min_value + TOL:
            joint.add(k)
        else:
            rows[k] = r
    # after lowering a, a new best route through b is more expensive than computed
    for k, r in ev.single("-", a, amount, [k for k in down if k not in joint]).items():
        if b in r.evade_path and r.evade_value <= r.min_value + TOL:
            joint.add(k)
        else:
            rows[k] = r
    if joint:
        if q is None:
            q = _shift(ev.p, minus, plus, amount)[0]
        rows.update(ev.solve(q, sorted(joint), lowered=(a,)))
    return ev.profit + ev.change(rows)
