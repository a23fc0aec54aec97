"""One-shot and rolling-window market runs over wind scenarios, plus aggregation."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from ..bids import SegmentedBid, StorageAsset
from ..errors import SocRegError, SolverError
from ..lp import INF, SolverOptions
from ..market import (
    ClearingProblem,
    ClearingResult,
    GeneratorAsset,
    NetworkModel,
    SettlementReport,
    check_unidirectional_condition,
    clear_convex,
    clear_mip,
    is_unidirectional,
    settle,
)
from ..market.settlement import bid_in_cost
from .scenarios import DEFAULT_MU, PowerCurve, Scenario, gen_scenarios

log = logging.getLogger(__name__)

VARIANTS = ("true", "edcr", "flat")
MODES = ("oneshot", "rolling")
#: largest SoC excursion past a limit treated as solver noise and clipped
SOC_SNAP = 1e-6


@dataclass(frozen=True)
class StudyConfig:
    horizon: int = 24
    window: int = 4
    scenarios: int = 100
    seed: int = 0
    reg_up_base: float = 25.0
    reg_down_base: float = 25.0
    shifts: tuple[float, ...] = (0.0, 5.0, 10.0)
    modes: tuple[str, ...] = MODES
    variants: tuple[str, ...] = ("edcr", "flat")
    sigma: float = 5.0
    mu: tuple[float, ...] = DEFAULT_MU
    curve: PowerCurve = field(default_factory=PowerCurve)
    workers: int = 1
    solver: SolverOptions = field(default_factory=SolverOptions)
    big_m: float | None = None

    def validate(self) -> list[str]:
        issues = []
        if not self.shifts:
            issues.append("shift list is empty")
        if not 1 <= self.window <= self.horizon:
            issues.append(f"window {self.window} must lie in [1, horizon={self.horizon}]")
        if len(self.mu) < self.horizon:
            issues.append(f"mu has {len(self.mu)} values, horizon is {self.horizon}")
        if self.scenarios < 1:
            issues.append("scenario count must be at least 1")
        for m in self.modes:
            if m not in MODES:
                issues.append(f"unknown mode {m!r}")
        for v in self.variants:
            if v not in VARIANTS:
                issues.append(f"unknown variant {v!r}")
        if self.workers < 1:
            issues.append("workers must be at least 1")
        return issues


@dataclass(frozen=True)
class CaseTemplate:
    """Everything but the wind: network, conventional units, storage and its bid variants.

    ``storage.bid`` is the storage's true cost curve; ``bids`` maps each
    variant name to the bid it submits.
    """

    network: NetworkModel
    generators: tuple[GeneratorAsset, ...]
    storage: StorageAsset
    bids: Mapping[str, SegmentedBid]
    wind_bus: int = 0
    wind_name: str = "wind"

    def problem(self, wind: Sequence[float], shift: float, variant: str,
                cfg: StudyConfig) -> ClearingProblem:
        T = cfg.horizon
        wind_unit = GeneratorAsset(self.wind_name, ((INF, 0.0),), tuple(wind[:T]),
                                   reg_up_cap=0.0, reg_down_cap=0.0, bus=self.wind_bus)
        storage = self.storage.with_bid(self.bids[variant])
        return ClearingProblem(
            self.network.window(0, T),
            tuple(self.generators) + (wind_unit,),
            (storage,),
            (cfg.reg_up_base + shift,) * T,
            (cfg.reg_down_base + shift,) * T,
        )


@dataclass
class RunOutcome:
    result: ClearingResult
    settlement: SettlementReport
    condition_violations: int = 0
    windows: int = 1


def clear(problem: ClearingProblem, variant: str, cfg: StudyConfig) -> ClearingResult:
    if variant == "true":
        return clear_mip(problem, cfg.solver, cfg.big_m)
    return clear_convex(problem, cfg.solver)


def _condition_violations(result: ClearingResult) -> int:
    if result.method != "lp":
        return 0
    return sum(c.violated for s in range(len(result.storages))
               for c in check_unidirectional_condition(result, index=s))


def run_one_shot(template: CaseTemplate, scenario: Scenario, variant: str, shift: float,
                 cfg: StudyConfig) -> RunOutcome:
    problem = template.problem(scenario.wind, shift, variant, cfg)
    result = clear(problem, variant, cfg)
    report = settle(result, [template.storage.bid])
    return RunOutcome(result, report, _condition_violations(result))


WindowHook = Callable[[int, ClearingProblem, ClearingResult], None]


def run_rolling(template: CaseTemplate, scenario: Scenario, variant: str, shift: float,
                cfg: StudyConfig, on_window: WindowHook | None = None) -> RunOutcome:
    """Receding-horizon clearing that commits the first interval of every window.

    Between windows each storage's SoC advances as if its committed
    capacities were fully used (down by ``r^u``, up by ``eta r^d``).
    """
    problem = template.problem(scenario.wind, shift, variant, cfg)
    T = problem.horizon
    n_gen, n_sto = len(problem.generators), len(problem.storages)
    g_e, g_u, g_d = (np.zeros((n_gen, T)) for _ in range(3))
    r_u, r_d = np.zeros((n_sto, T)), np.zeros((n_sto, T))
    soc = np.zeros((n_sto, T + 1))
    soc[:, 0] = [st.initial_soc for st in problem.storages]
    beta_u, beta_d, energy = np.zeros(T), np.zeros(T), np.zeros(T)
    violations = 0
    gaps = []
    for t in range(T):
        length = min(cfg.window, T - t)
        sub = problem.window(t, length, socs=soc[:, t])
        try:
            res = clear(sub, variant, cfg)
        except SolverError as exc:
            raise SolverError(f"rolling window starting at t={t}: {exc}", exc.status, t) from exc
        if on_window is not None:
            on_window(t, sub, res)
        violations += _condition_violations(res)
        gaps.append(res.gap)
        g_e[:, t], g_u[:, t], g_d[:, t] = res.g_e[:, 0], res.g_u[:, 0], res.g_d[:, 0]
        r_u[:, t], r_d[:, t] = res.r_u[:, 0], res.r_d[:, 0]
        beta_u[t], beta_d[t], energy[t] = res.price_up[0], res.price_down[0], res.energy_price[0]
        for s, st in enumerate(problem.storages):
            nxt = soc[s, t] + st.bid.efficiency * r_d[s, t] - r_u[s, t]
            soc[s, t + 1] = _snap(nxt, st.bid)
    storage_cost = np.array([bid_in_cost(st, r_u[s], r_d[s])
                             for s, st in enumerate(problem.storages)])
    gen_cost = sum(g.cost(g_e[i, t], g_u[i, t], g_d[i, t])
                   for i, g in enumerate(problem.generators) for t in range(T))
    result = ClearingResult(
        method=f"rolling-{'mip' if variant == 'true' else 'lp'}",
        status="optimal" if max(gaps) <= cfg.solver.gap_tol else "node_limit",
        objective=float(gen_cost + storage_cost.sum()),
        g_e=g_e, g_u=g_u, g_d=g_d, r_u=r_u, r_d=r_d, soc=soc,
        price_up=beta_u, price_down=beta_d, energy_price=energy,
        storage_cost=storage_cost, generator_names=[g.name for g in problem.generators],
        storages=problem.storages, gap=max(gaps),
    )
    report = settle(result, [template.storage.bid])
    return RunOutcome(result, report, violations, T)


def _snap(value: float, bid: SegmentedBid) -> float:
    """Remove solver noise at the SoC limits; larger excursions are errors."""
    lo, hi = bid.soc_min, bid.soc_max
    if value < lo - SOC_SNAP or value > hi + SOC_SNAP:
        raise SocRegError(f"committed SoC {value} leaves [{lo}, {hi}]")
    return min(max(value, lo), hi)


# -- study -----------------------------------------------------------------------

RECORD_COLUMNS = ["scenario", "variant", "shift", "mode", "status", "system_cost", "payment",
                  "bid_in_profit", "true_cost", "true_profit", "unidirectional",
                  "condition_violations", "gap"]


def run_scenario(template: CaseTemplate, cfg: StudyConfig, scenario: Scenario) -> list[dict]:
    records = []
    for mode in cfg.modes:
        runner = run_one_shot if mode == "oneshot" else run_rolling
        for shift in cfg.shifts:
            for variant in cfg.variants:
                out = runner(template, scenario, variant, shift, cfg)
                st = out.settlement.storages[0]
                records.append({
                    "scenario": scenario.index, "variant": variant, "shift": float(shift),
                    "mode": mode, "status": out.result.status,
                    "system_cost": out.settlement.system_cost, "payment": st.payment,
                    "bid_in_profit": st.bid_in_profit, "true_cost": st.true_cost,
                    "true_profit": st.true_profit,
                    "unidirectional": is_unidirectional(out.result),
                    "condition_violations": out.condition_violations, "gap": out.result.gap,
                })
    return records


def _scenario_task(args):
    template, cfg, scenario = args
    return run_scenario(template, cfg, scenario)


@dataclass
class StudyResult:
    records: list[dict]
    summary: list[dict]
    long: list[dict]


def run_study(template: CaseTemplate, cfg: StudyConfig,
              scenarios: Sequence[Scenario] | None = None) -> StudyResult:
    """All scenarios x modes x shifts x variants; deterministic for a given seed."""
    issues = cfg.validate()
    if issues:
        raise ValueError("invalid study configuration: " + "; ".join(issues))
    if scenarios is None:
        scenarios = gen_scenarios(cfg.scenarios, cfg.mu[:cfg.horizon], cfg.sigma, cfg.seed,
                                  cfg.curve)
    tasks = [(template, cfg, sc) for sc in scenarios]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_scenario_task, tasks))
    else:
        chunks = [_scenario_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    summary = aggregate(records)
    return StudyResult(records, summary, long_format(summary))


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _pct(new: float, base: float) -> float:
    return 100.0 * (new - base) / abs(base) if base != 0 else float("nan")


def aggregate(records: Sequence[dict], baseline: str = "flat", candidate: str = "edcr"
              ) -> list[dict]:
    """Means per (mode, shift, variant) and candidate-vs-baseline percentage deltas.

    Sums use ``math.fsum`` over records sorted by scenario index, so the
    result does not depend on the order records arrive in.
    """
    cells: dict[tuple, list[dict]] = {}
    for rec in sorted(records, key=lambda r: (r["mode"], r["shift"], r["variant"], r["scenario"])):
        cells.setdefault((rec["mode"], rec["shift"], rec["variant"]), []).append(rec)
    rows = []
    for (mode, shift, variant), recs in cells.items():
        rows.append({
            "mode": mode, "shift": shift, "variant": variant, "n": len(recs),
            "mean_true_profit": _mean([r["true_profit"] for r in recs]),
            "mean_bid_in_profit": _mean([r["bid_in_profit"] for r in recs]),
            "mean_payment": _mean([r["payment"] for r in recs]),
            "mean_system_cost": _mean([r["system_cost"] for r in recs]),
            "unidirectional_share": _mean([float(r["unidirectional"]) for r in recs]),
        })
    by_key = {(r["mode"], r["shift"], r["variant"]): r for r in rows}
    for (mode, shift, variant), row in list(by_key.items()):
        if variant != candidate or (mode, shift, baseline) not in by_key:
            continue
        base = by_key[(mode, shift, baseline)]
        rows.append({
            "mode": mode, "shift": shift, "variant": f"{candidate}_vs_{baseline}",
            "n": row["n"],
            "profit_gain_pct": _pct(row["mean_true_profit"], base["mean_true_profit"]),
            "cost_change_pct": _pct(row["mean_system_cost"], base["mean_system_cost"]),
        })
    return rows


SUMMARY_METRICS = ("mean_true_profit", "mean_bid_in_profit", "mean_payment",
                   "mean_system_cost", "unidirectional_share", "profit_gain_pct",
                   "cost_change_pct")
LONG_COLUMNS = ["metric", "variant", "shift", "mode", "value"]


def long_format(summary: Sequence[dict]) -> list[dict]:
    """Plot-ready rows ``(metric, variant, shift, mode, value)``."""
    out = []
    for row in summary:
        for metric in SUMMARY_METRICS:
            if metric in row:
                out.append({"metric": metric, "variant": row["variant"], "shift": row["shift"],
                            "mode": row["mode"], "value": row[metric]})
    return out


def with_overrides(cfg: StudyConfig, **changes) -> StudyConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})


# -- LP / MIP agreement --------------------------------------------------------------

def mip_agreement(template: CaseTemplate, cfg: StudyConfig, scenarios: Sequence[Scenario],
                  modes: Sequence[str] = MODES, variant: str = "edcr") -> list[dict]:
    """Re-clear every unidirectional convex instance with the segment MIP.

    Instances are the one-shot problems and every rolling window. The MIP
    root heuristic is seeded with the convex capacities. Returns one row
    per instance with both objectives and the relative gap
    ``|mip - lp| / (1 + |lp|)`` (``nan`` when the instance was skipped).
    """
    rows: list[dict] = []

    def check(scenario: Scenario, shift: float, mode: str, t: int,
              problem: ClearingProblem, convex: ClearingResult):
        row = {"scenario": scenario.index, "shift": float(shift), "mode": mode, "t": t,
               "unidirectional": is_unidirectional(convex), "lp_objective": convex.objective,
               "mip_objective": float("nan"), "rel_gap": float("nan"), "mip_status": ""}
        if row["unidirectional"]:
            mip = clear_mip(problem, cfg.solver, cfg.big_m, warm_start=convex)
            row["mip_objective"] = mip.objective
            row["mip_status"] = mip.status
            row["rel_gap"] = abs(mip.objective - convex.objective) / (1.0 + abs(convex.objective))
        rows.append(row)

    for scenario in scenarios:
        for shift in cfg.shifts:
            if "oneshot" in modes:
                problem = template.problem(scenario.wind, shift, variant, cfg)
                check(scenario, shift, "oneshot", 0, problem, clear_convex(problem, cfg.solver))
            if "rolling" in modes:
                run_rolling(template, scenario, variant, shift, cfg,
                            on_window=lambda t, p, r, sc=scenario, sh=shift:
                            check(sc, sh, "rolling", t, p, r))
    return rows
