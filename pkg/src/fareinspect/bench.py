"""Experiment harness: budget sweeps over instance suites, CSV records and aggregates."""

from __future__ import annotations

import csv
import io
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .generator import default_budgets
from .leader import (LeaderSolution, VariantId, evaluate_profit, round_relaxation,
                     solve_relaxation)
from .localsearch import LocalSearchConfig, local_search, support_set
from .multicut import minimum_multicut
from .network import Instance, read_instance

ALGORITHMS = ("lp", "lp+ls", "mc", "mc+ls")
GAP_SLACK = 1e-6


@dataclass
class RunRecord:
    instance: str
    variant: str
    algorithm: str
    budget: float
    profit: float
    upper_bound: float
    gap: float
    wall_time_ms: float
    seed: int
    status: str = "ok"

    def check(self) -> "RunRecord":
        if self.status == "ok" and not -GAP_SLACK <= self.gap <= 1 + GAP_SLACK:
            self.status = f"gap {self.gap:.9g} outside [0, 1]"
        return self

    def row(self) -> list[str]:
        return [self.instance, self.variant, self.algorithm, f"{self.budget:.10g}",
                _num(self.profit), _num(self.upper_bound), _num(self.gap),
                f"{self.wall_time_ms:.3f}", str(self.seed), self.status]


CSV_COLUMNS = [f.name for f in fields(RunRecord)]


def _num(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.10g}"


def graph_class(name: str) -> str:
    m = re.match(r"^(.*?)_n\d+_k\d+_seed\d+", name)
    return m.group(1) if m else name


@dataclass(frozen=True)
class SweepSettings:
    variants: tuple[str, ...] = ("fix-n", "fix-a", "flex-n", "flex-a")
    algorithms: tuple[str, ...] = ALGORITHMS
    budgets: tuple[float, ...] | None = None     # None: the instance's own budget
    ls_config: LocalSearchConfig = LocalSearchConfig()
    lp_method: str = "highs"
    warm_start: bool = True
    omit_timing: bool = False


class _Sweep:
    """One instance across budgets; memoizes relaxations and local-search runs."""

    def __init__(self, inst: Instance, name: str, seed: int, settings: SweepSettings):
        self.inst, self.name, self.seed, self.s = inst, name, seed, settings
        self.relax: dict = {}
        self.ls_memo: dict = {}
        self.cut: list[int] | None = None

    def relaxation(self, inst: Instance, fares: str):
        key = (inst.budget, fares)
        if key not in self.relax:
            self.relax[key] = solve_relaxation(inst, self.s.lp_method, fares=fares)
        return self.relax[key]

    def ls(self, inst: Instance, variant: VariantId, start, support, name: str) -> LeaderSolution:
        # the search never reads the budget, so identical inputs give identical runs
        key = (variant.code, np.asarray(start).tobytes(), tuple(support))
        if key not in self.ls_memo:
            self.ls_memo[key] = local_search(inst, variant, start, support, self.s.ls_config,
                                             start_name=name)
        return self.ls_memo[key]

    def run(self) -> list[RunRecord]:
        budgets = self.s.budgets if self.s.budgets is not None else (self.inst.budget,)
        records = []
        for code in self.s.variants:
            variant = VariantId.parse(code)
            previous: dict[str, LeaderSolution] = {}
            for budget in budgets:
                inst = self.inst.with_budget(budget)
                for alg in self.s.algorithms:
                    t0 = time.perf_counter()
                    try:
                        sol = self._solve(inst, variant, alg, previous.get(alg))
                        previous[alg] = sol
                        rec = RunRecord(self.name, variant.code, alg, budget, sol.profit,
                                        sol.upper_bound, sol.gap, 0.0, self.seed)
                    except Exception as exc:    # recorded, the sweep goes on
                        rec = RunRecord(self.name, variant.code, alg, budget, math.nan,
                                        math.nan, math.nan, 0.0, self.seed,
                                        f"error: {type(exc).__name__}: {exc}")
                    if not self.s.omit_timing:
                        rec.wall_time_ms = 1000.0 * (time.perf_counter() - t0)
                    records.append(rec.check())
        return records

    def _solve(self, inst: Instance, variant: VariantId, alg: str,
               previous: LeaderSolution | None) -> LeaderSolution:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
        rel = self.relaxation(inst, variant.fares)
        if alg.startswith("lp"):
            start, support, name = rel.probabilities, support_set(rel), "lp"
        else:
            if self.cut is None:
                self.cut = minimum_multicut(inst.network, [(c.source, c.target)
                                                           for c in inst.commodities])
            start = np.zeros(inst.network.n_edges)
            if self.cut:
                start[self.cut] = min(1.0, inst.budget / len(self.cut))
            support, name = list(self.cut), "multicut"
        if not alg.endswith("+ls"):
            if alg == "lp":
                return round_relaxation(inst, rel, variant)
            return LeaderSolution(start, variant, evaluate_profit(inst, start, variant),
                                  rel.bound, "multicut")
        sol = self.ls(inst, variant, start, support, name)
        if (self.s.warm_start and previous is not None and previous.profit > sol.profit
                and previous.strategy.sum() <= inst.budget + 1e-9):
            # a smaller budget's strategy stays feasible; search on from it
            warm_support = sorted(set(support) | set(support_set(previous.strategy)))
            warm = self.ls(inst, variant, previous.strategy, warm_support, name)
            if warm.profit > sol.profit:
                sol = warm
        return _rebound(sol, rel.bound)


def _rebound(sol: LeaderSolution, bound: float) -> LeaderSolution:
    return LeaderSolution(sol.strategy, sol.variant, sol.breakdown, bound, sol.provenance,
                          sol.iterations, list(sol.history))


def run_instance(inst: Instance, name: str, seed: int, settings: SweepSettings) -> list[RunRecord]:
    return _Sweep(inst, name, seed, settings).run()


def _run_file(args) -> list[RunRecord]:
    path, seed, settings = args
    return run_instance(read_instance(path), Path(path).stem, seed, settings)


def suite_files(suite: Path) -> list[Path]:
    files = sorted(p for p in Path(suite).glob("*.json") if p.name != "manifest.json")
    if not files:
        raise FileNotFoundError(f"no instance files in {suite}")
    return files


def run_suite(files, seed: int, settings: SweepSettings, parallel: int = 1) -> list[RunRecord]:
    jobs = [(str(f), seed, settings) for f in files]
    if parallel <= 1:
        parts = [_run_file(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = list(pool.map(_run_file, jobs))
    return [rec for part in parts for rec in part]


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def read_records(text: str) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(RunRecord(row["instance"], row["variant"], row["algorithm"],
                             float(row["budget"]), float(row["profit"]),
                             float(row["upper_bound"]), float(row["gap"]),
                             float(row["wall_time_ms"]), int(row["seed"]), row["status"]))
    return out


def aggregate(records) -> list[dict]:
    """Mean gap per (graph class, variant, algorithm) over successful runs."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.status == "ok":
            groups.setdefault((graph_class(rec.instance), rec.variant, rec.algorithm),
                              []).append(rec)
    return [{"graph_class": k[0], "variant": k[1], "algorithm": k[2], "runs": len(v),
             "mean_gap": float(np.mean([r.gap for r in v])),
             "mean_profit": float(np.mean([r.profit for r in v])),
             "mean_wall_time_ms": float(np.mean([r.wall_time_ms for r in v]))}
            for k, v in sorted(groups.items())]


def budget_curve(records) -> list[dict]:
    """Budget against mean gap and mean profit per (class, variant, algorithm)."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.status == "ok":
            key = (graph_class(rec.instance), rec.variant, rec.algorithm, rec.budget)
            groups.setdefault(key, []).append(rec)
    return [{"graph_class": k[0], "variant": k[1], "algorithm": k[2], "budget": k[3],
             "mean_gap": float(np.mean([r.gap for r in v])),
             "mean_profit": float(np.mean([r.profit for r in v]))}
            for k, v in sorted(groups.items())]


def boxplot_columns(records) -> tuple[list[str], list[list[str]]]:
    """One row per (instance, budget), one gap column per variant/algorithm pair."""
    cols = sorted({f"{r.variant}/{r.algorithm}" for r in records})
    rows: dict[tuple, dict] = {}
    for r in records:
        rows.setdefault((r.instance, r.budget), {})[f"{r.variant}/{r.algorithm}"] = \
            _num(r.gap) if r.status == "ok" else ""
    header = ["instance", "budget"] + cols
    body = [[inst, f"{b:.10g}"] + [vals.get(c, "") for c in cols]
            for (inst, b), vals in sorted(rows.items())]
    return header, body


def _dicts_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def write_outputs(records, out_dir: Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / f"{name}.csv" for name in ("runs", "aggregate", "budget_curve",
                                                          "boxplot")}
    paths["runs"].write_text(records_csv(records))
    paths["aggregate"].write_text(_dicts_csv(aggregate(records)))
    paths["budget_curve"].write_text(_dicts_csv(budget_curve(records)))
    header, body = boxplot_columns(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(body)
    paths["boxplot"].write_text(buf.getvalue())
    return paths


def default_sweep() -> tuple[float, ...]:
    return tuple(default_budgets())
