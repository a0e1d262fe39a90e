"""Leader revenue for the four model variants, the LP relaxation and its rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .followers import (ADAPTIVE, NON_ADAPTIVE, adaptive_labels, follower_model,
                        solve_nonadaptive_exact, solve_nonadaptive_fptas, unroll)
from .network import (TOL, Instance, check_strategy, shortest_path, shortest_path_tree_from,
                      strategy_to_dict)

FIXED = "fixed"
FLEXIBLE = "flexible"
BOUND_SLACK = 1e-9        # relative padding on solver bounds


@dataclass(frozen=True)
class VariantId:
    fares: str
    followers: str

    def __post_init__(self):
        if self.fares not in (FIXED, FLEXIBLE):
            raise ValueError(f"unknown fare setting {self.fares!r}")
        object.__setattr__(self, "followers", follower_model(self.followers))

    @property
    def code(self) -> str:
        return ("fix" if self.fares == FIXED else "flex") + "-" + \
            ("n" if self.followers == NON_ADAPTIVE else "a")

    @classmethod
    def parse(cls, text: "str | VariantId") -> "VariantId":
        if isinstance(text, VariantId):
            return text
        try:
            fares, followers = str(text).lower().split("-", 1)
        except ValueError:
            raise ValueError(f"unknown variant {text!r}") from None
        fares = {"fix": FIXED, "fixed": FIXED, "flex": FLEXIBLE, "flexible": FLEXIBLE}.get(fares)
        if fares is None:
            raise ValueError(f"unknown variant {text!r}")
        return cls(fares, followers)

    def __str__(self) -> str:
        return self.code


FIX_N = VariantId(FIXED, NON_ADAPTIVE)
FIX_A = VariantId(FIXED, ADAPTIVE)
FLEX_N = VariantId(FLEXIBLE, NON_ADAPTIVE)
FLEX_A = VariantId(FLEXIBLE, ADAPTIVE)
VARIANTS = (FIX_N, FIX_A, FLEX_N, FLEX_A)


@dataclass
class CommodityRevenue:
    index: int
    gamma: float              # revenue per passenger
    choice: str               # "ticket" or "evade"
    path: tuple[int, ...]     # route actually travelled
    evade_value: float        # best evasion cost
    min_value: float          # best cost over evasion and (fixed fares) the ticket
    evade_path: tuple[int, ...]


@dataclass
class RevenueBreakdown:
    per_commodity: list[CommodityRevenue]
    total_profit: float

    def to_dict(self) -> dict:
        return {"total_profit": self.total_profit,
                "per_commodity": [{"commodity": r.index, "gamma": r.gamma, "choice": r.choice,
                                   "path": list(r.path)} for r in self.per_commodity]}


def _decide(inst: Instance, k: int, variant: VariantId, options, sp: float,
            routes: bool = True) -> CommodityRevenue:
    """Turn near-optimal evasion options ``(f, survival, path)`` into leader revenue.

    Ticket buyers travel a cost-shortest path; with ``routes=False`` it is not
    looked up and ``path`` is left empty.
    """
    com = inst.commodities[k]

    def sp_path():
        if not routes:
            return ()
        return shortest_path(inst.network, inst.network.costs, com.source, com.target)

    F = inst.fine
    v = min(o[0] for o in options)
    if variant.fares == FLEXIBLE:
        f, _, path = min(options, key=lambda o: (o[0], o[2]))
        return CommodityRevenue(k, max(v - sp, 0.0), "ticket", sp_path(), v, v, path)
    ticket_f = sp + com.ticket
    m = min(v, ticket_f)
    best_rev, best_path = -math.inf, None
    for f, surv, path in sorted(options, key=lambda o: o[2]):
        if f <= m + TOL and F * (1.0 - surv) > best_rev:
            best_rev, best_path = F * (1.0 - surv), path
    if best_path is None:
        best_path = min(options, key=lambda o: (o[0], o[2]))[2]
    if ticket_f <= m + TOL and com.ticket >= best_rev:
        return CommodityRevenue(k, com.ticket, "ticket", sp_path(), v, m, best_path)
    return CommodityRevenue(k, best_rev, "evade", best_path, v, m, best_path)


def _nonadaptive_options(inst: Instance, p, k: int, epsilon: float | None, **hints):
    F = inst.fine
    if epsilon is not None:
        res = solve_nonadaptive_fptas(inst, p, k, epsilon)
        return [(res.value, res.label.survival, res.path)]
    res = solve_nonadaptive_exact(inst, p, k, prune=True, **hints)
    return [(lab.cost + F * (1.0 - lab.survival), lab.survival, lab.path) for lab in res.frontier]


def revenue(inst: Instance, p, k: int, variant, *, epsilon: float | None = None) -> CommodityRevenue:
    """Revenue per passenger of commodity ``k`` under strategy ``p``.

    ``epsilon`` switches the non-adaptive response to the FPTAS (approximate).
    """
    variant = VariantId.parse(variant)
    p = np.asarray(p, dtype=float)
    sp = inst.sp_cost(k)
    if variant.followers == NON_ADAPTIVE:
        options = _nonadaptive_options(inst, p, k, epsilon)
    else:
        com = inst.commodities[k]
        labels = adaptive_labels(inst.network, p, inst.fine, com.target, inst.sp_to(com.target))
        options = [_adaptive_option(inst, p, labels, com)]
    return _decide(inst, k, variant, options, sp)


def _adaptive_option(inst: Instance, p, labels, com):
    path = unroll(inst.network, labels, com.source, com.target)
    surv = 1.0
    for e in path:
        surv *= 1.0 - p[e]
    return (float(labels.phi[com.source]), surv, path)


def evaluate_profit(inst: Instance, p, variant, *, commodities=None,
                    epsilon: float | None = None, routes: bool = True) -> RevenueBreakdown:
    variant = VariantId.parse(variant)
    p = np.asarray(p, dtype=float)
    ks = range(len(inst.commodities)) if commodities is None else commodities
    out = []
    if variant.followers == ADAPTIVE:
        by_target: dict[int, object] = {}
        for k in ks:
            com = inst.commodities[k]
            if com.target not in by_target:
                by_target[com.target] = adaptive_labels(inst.network, p, inst.fine, com.target,
                                                        inst.sp_to(com.target))
            opt = _adaptive_option(inst, p, by_target[com.target], com)
            out.append(_decide(inst, k, variant, [opt], inst.sp_cost(k), routes))
    else:
        for k in ks:
            out.append(_decide(inst, k, variant, _nonadaptive_options(inst, p, k, epsilon),
                               inst.sp_cost(k), routes))
    total = float(sum(inst.commodities[r.index].demand * r.gamma for r in out))
    return RevenueBreakdown(out, total)


def total_profit(inst: Instance, p, variant, **kw) -> float:
    return evaluate_profit(inst, p, variant, **kw).total_profit


# ------------------------------------------------------------------ relaxation

class RelaxationError(RuntimeError):
    def __init__(self, message: str, best: "RelaxationSolution"):
        super().__init__(message)
        self.best = best


@dataclass
class RelaxationSolution:
    probabilities: np.ndarray
    potentials: np.ndarray     # (K, n): y_i(v), inf where v is unreachable from s_i
    objective: float
    lambdas: np.ndarray        # per commodity y_i(t_i) - y_i(s_i) - SP_c(s_i, t_i)
    bound: float               # certified upper bound on the LP optimum
    method: str
    iterations: int = 0
    fares: str = FLEXIBLE

    @property
    def certificate_gap(self) -> float:
        return self.bound - self.objective


def revenue_caps(inst: Instance, fares: str = FLEXIBLE) -> np.ndarray:
    """Per-commodity cap on lambda_i: F, or the ticket price under fixed fares.

    The cap F linearizes min(sum p, 1) instead of sum p; under fixed fares no
    passenger ever pays more than the ticket, so T_i bounds the revenue too.
    """
    F = inst.fine
    if _fares(fares) == FIXED:
        return np.array([min(c.ticket, F) for c in inst.commodities])
    return np.full(len(inst.commodities), F)


def _fares(fares) -> str:
    if isinstance(fares, VariantId):
        return fares.fares
    if fares in (FIXED, FLEXIBLE):
        return fares
    return VariantId.parse(fares).fares


def relaxation_value(inst: Instance, p, fares: str = FLEXIBLE
                     ) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Concave LP value at ``p``: sum_i d_i min(SP_{c+Fp}(s_i, t_i) - SP_c(s_i, t_i), cap_i).

    Also returns per-commodity lambdas, potentials and a supergradient.
    """
    net = inst.network
    p = np.asarray(p, dtype=float)
    F = inst.fine
    caps = revenue_caps(inst, fares)
    w = net.costs + F * p
    K = len(inst.commodities)
    lambdas = np.zeros(K)
    pots = np.full((K, net.n_nodes), np.inf)
    grad = np.zeros(net.n_edges)
    trees: dict[int, tuple] = {}
    for i, com in enumerate(inst.commodities):
        if com.source not in trees:
            dist, pred = shortest_path_tree_from(net, w, com.source)
            plain = shortest_path_tree_from(net, net.costs, com.source)[0]
            trees[com.source] = (dist, pred, plain)
        dist, pred, plain = trees[com.source]
        pots[i] = np.minimum(dist, plain + caps[i])
        lambdas[i] = pots[i][com.target] - inst.sp_cost(i)
        if dist[com.target] > pots[i][com.target]:
            continue
        v = com.target
        while v != com.source:
            e = int(pred[v])
            grad[e] += F * com.demand
            v = net.edges[e].tail
    demands = np.array([c.demand for c in inst.commodities])
    return float(demands @ lambdas) if K else 0.0, lambdas, pots, grad


def project_capped_simplex(x, budget: float) -> np.ndarray:
    """Euclidean projection onto {p in [0,1]^m : sum(p) <= budget}."""
    x = np.asarray(x, dtype=float)
    y = np.clip(x, 0.0, 1.0)
    if y.sum() <= budget:
        return y
    lo, hi = 0.0, float(x.max())
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if np.clip(x - mid, 0.0, 1.0).sum() > budget:
            lo = mid
        else:
            hi = mid
    # exact tau on the final linear piece
    tau = hi
    free = (x - tau > 0) & (x - tau < 1)
    ones = x - tau >= 1
    if free.any():
        tau = (x[free].sum() - (budget - ones.sum())) / free.sum()
    y = np.clip(x - tau, 0.0, 1.0)
    excess = y.sum() - budget
    if excess > 0:
        y *= budget / y.sum()
    return y


def _linear_max(grad: np.ndarray, budget: float) -> float:
    """max grad @ q over the capped simplex (fractional knapsack)."""
    g = np.sort(grad[grad > 0])[::-1]
    whole = int(min(math.floor(budget), g.size))
    val = g[:whole].sum()
    if whole < g.size:
        val += (budget - whole) * g[whole]
    return float(val)


def _package(inst: Instance, p, method: str, bound: float, iterations: int,
             fares: str) -> RelaxationSolution:
    obj, lambdas, pots, _ = relaxation_value(inst, p, fares)
    return RelaxationSolution(p, pots, obj, lambdas, max(bound, obj), method, iterations, fares)


def _solve_highs(inst: Instance, fares: str) -> RelaxationSolution:
    net = inst.network
    m = net.n_edges
    F = inst.fine
    caps = revenue_caps(inst, fares)
    # variables: p_0..p_{m-1}, then y_i(v) for nodes reachable from s_i
    col = {}
    nvar = m
    rows, cols, vals, rhs = [], [], [], []
    bounds = [(0.0, 1.0)] * m
    const = 0.0
    r = 0
    for i, com in enumerate(inst.commodities):
        reach = np.isfinite(shortest_path_tree_from(net, net.costs, com.source)[0])
        for v in np.flatnonzero(reach):
            col[i, v] = nvar
            bounds.append((0.0, 0.0) if v == com.source else (None, None))
            nvar += 1
        for e in net.edges:
            if not reach[e.tail] or e.tail == e.head:
                continue
            rows += [r, r, r]
            cols += [col[i, e.head], col[i, e.tail], e.id]
            vals += [1.0, -1.0, -F]
            rhs.append(e.cost)
            r += 1
        rows.append(r)
        cols.append(col[i, com.target])
        vals.append(1.0)
        rhs.append(inst.sp_cost(i) + caps[i])
        r += 1
        const += com.demand * inst.sp_cost(i)
    rows += [r] * m
    cols += list(range(m))
    vals += [1.0] * m
    rhs.append(inst.budget)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(r + 1, nvar))
    c = np.zeros(nvar)
    for i, com in enumerate(inst.commodities):
        c[col[i, com.target]] -= com.demand
    res = linprog(c, A_ub=A, b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    p = np.clip(res.x[:m], 0.0, 1.0)
    if p.sum() > inst.budget:
        p *= inst.budget / p.sum()
    lp_value = -res.fun - const
    bound = lp_value + BOUND_SLACK * max(1.0, abs(lp_value))
    return _package(inst, p, "highs", bound, int(res.nit), fares)


def _solve_supergradient(inst: Instance, fares: str, max_iter: int, stall_steps: int,
                         stall_tol: float) -> RelaxationSolution:
    m, B = inst.network.n_edges, inst.budget
    p = np.zeros(m)
    best_val, best_p = -math.inf, p
    bound = math.inf
    ref_val, ref_it = -math.inf, 0
    radius = math.sqrt(min(B, m) * max(min(B, 1.0), 1e-12))
    # step-weighted aggregates over a window restarted at powers of two: the
    # averaged iterate damps zigzagging between tied paths, and by concavity
    # f(q) <= sum_k w_k (f(p_k) + g_k (q - p_k)) / W certifies an upper bound
    window, W = 1, 0.0
    agg_g, agg_c, avg = np.zeros(m), 0.0, np.zeros(m)
    it = 0
    for it in range(max_iter):
        val, _, _, grad = relaxation_value(inst, p, fares)
        if val > best_val:
            best_val, best_p = val, p
        if W > 0:
            mean = avg / W
            mean_val = relaxation_value(inst, mean, fares)[0]
            if mean_val > best_val:
                best_val, best_p = mean_val, mean
        gnorm = float(np.linalg.norm(grad))
        step = radius / (max(gnorm, 1e-300) * math.sqrt(it + 1))
        if it + 1 == 2 * window:
            window, W = it + 1, 0.0
            agg_g[:], agg_c, avg[:] = 0.0, 0.0, 0.0
        W += step
        agg_g += step * grad
        agg_c += step * (val - float(grad @ p))
        avg += step * p
        bound = min(bound, val + _linear_max(grad, B) - float(grad @ p))
        if W > 0:
            bound = min(bound, (agg_c + _linear_max(agg_g, B)) / W)
        if best_val - ref_val > stall_tol * max(abs(ref_val), 1e-12) or ref_val == -math.inf:
            ref_val, ref_it = best_val, it
        if (bound - best_val <= 1e-9 * max(1.0, abs(best_val)) or it - ref_it >= stall_steps
                or gnorm == 0):
            break
        p = project_capped_simplex(p + step * grad, B)
    else:
        sol = _package(inst, best_p, "supergradient", bound, it + 1, fares)
        raise RelaxationError(f"no convergence after {max_iter} steps; certificate gap "
                              f"{sol.certificate_gap:.3g}", sol)
    return _package(inst, best_p, "supergradient", bound, it + 1, fares)


def solve_relaxation(inst: Instance, method: str = "highs", *, fares=FLEXIBLE,
                     max_iter: int = 50_000, stall_steps: int = 200,
                     stall_tol: float = 1e-7) -> RelaxationSolution:
    """Solve the LP relaxation, whose optimum bounds the profit of every variant.

    With ``fares`` fixed (a fare setting or a variant) lambda_i is capped at
    T_i instead of F, a tighter bound valid for the fixed-fare variants only.

    ``method="highs"`` solves the potential-based LP exactly (vertex solution).
    ``method="supergradient"`` maximizes the equivalent concave function of p by
    projected supergradient ascent, stopping when the best value improves by less
    than ``stall_tol`` (relative) over ``stall_steps`` steps.
    """
    fares = _fares(fares)
    if method == "highs":
        return _solve_highs(inst, fares)
    if method == "supergradient":
        return _solve_supergradient(inst, fares, max_iter, stall_steps, stall_tol)
    raise ValueError(f"unknown relaxation method {method!r}")


# --------------------------------------------------------------------- solutions

def gap_ratio(profit: float, upper_bound: float) -> float:
    # a bound within solver slack of zero counts as zero
    if upper_bound <= BOUND_SLACK:
        return 1.0
    return profit / upper_bound


@dataclass
class LeaderSolution:
    strategy: np.ndarray
    variant: VariantId
    breakdown: RevenueBreakdown
    upper_bound: float
    provenance: str
    iterations: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def profit(self) -> float:
        return self.breakdown.total_profit

    @property
    def gap(self) -> float:
        return gap_ratio(self.profit, self.upper_bound)

    def to_dict(self) -> dict:
        return {"variant": self.variant.code, "provenance": self.provenance,
                "profit": self.profit, "upper_bound": self.upper_bound, "gap": self.gap,
                "iterations": self.iterations, "history": list(self.history),
                "strategy": strategy_to_dict(self.strategy),
                "breakdown": self.breakdown.to_dict()}


def round_relaxation(inst: Instance, relaxation: RelaxationSolution, variant) -> LeaderSolution:
    """Use the relaxation's probabilities directly as the inspection strategy."""
    variant = VariantId.parse(variant)
    p = check_strategy(relaxation.probabilities, inst, tol=1e-7)
    return LeaderSolution(p, variant, evaluate_profit(inst, p, variant), relaxation.bound,
                          "lp-round")
