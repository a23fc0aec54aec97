"""Segment-level MIP clearing for arbitrary (possibly non-EDCR) bids.

Each storage's SoC is split across its K bid segments, ``e[k,t]`` in
``[0, w_k]``. Within an interval the cleared capacities are realized along
one of two routes: route 1 moves down first and then up, route 2 moves up
first and then down. A binary pair ``(skip1, skip2)`` with
``skip1 + skip2 = 1`` relaxes, through big-M rows, the route that is not
selected; the selected route's per-segment movements must equal the
cleared per-segment capacities, so the storage cost is
``sum_k a^u_k ru_k + a^d_k rd_k`` evaluated along that route.

Fill-logic binaries keep every SoC vector (interval end and both route
midpoints) in fill form: segment ``k+1`` holds energy only when segment
``k`` is full.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..bids import SegmentedBid, StorageAsset
from ..costs import f_down, f_up
from ..errors import SocRangeError, SolverError
from ..lp import MixedIntegerProgram, SolverOptions, solve_mip
from .builder import FleetModel
from .problem import ClearingProblem, ClearingResult

log = logging.getLogger(__name__)

FILL_TOL = 1e-9


def default_big_m(storage: StorageAsset, horizon: int) -> float:
    """``2 max(E_{K+1}, sum_t (rbar^u + rbar^d))`` with the caps clipped to what the SoC range allows."""
    bid = storage.bid
    span = bid.soc_max - bid.soc_min
    up = min(storage.reg_up_cap, span)
    down = min(storage.reg_down_cap, span / bid.efficiency)
    return 2.0 * max(bid.soc_max, horizon * (up + down))


def fill_form(bid: SegmentedBid, soc: float) -> np.ndarray:
    """Per-segment energy of a fill-form SoC vector."""
    bp = np.asarray(bid.breakpoints)
    return np.clip(soc - bp[:-1], 0.0, bid.widths)


def fill_binaries(bid: SegmentedBid, soc: float) -> np.ndarray:
    """Fill-logic binaries ``v_k = 1`` iff segment k is full (k < K)."""
    inner = np.asarray(bid.breakpoints[1:-1])
    return (soc >= inner - FILL_TOL).astype(float)


@dataclass
class _StorageCols:
    e: np.ndarray        # (K, T+1)
    ru: np.ndarray       # (K, T)
    rd: np.ndarray
    fill: dict           # (kind, t) -> list of K-1 binary columns
    skip: np.ndarray     # (2, T)


class SegmentModel(FleetModel):
    def __init__(self, problem: ClearingProblem, big_m: float | None = None):
        super().__init__(problem, "clear_mip")
        self.add_generators()
        self.mip = MixedIntegerProgram(self.lp)
        self.cols: list[_StorageCols] = []
        self.big_m: list[float] = []
        storage_up = [[] for _ in range(self.T)]
        storage_down = [[] for _ in range(self.T)]
        for st in problem.storages:
            M = big_m if big_m is not None else default_big_m(st, self.T)
            self.big_m.append(M)
            cols = self._add_storage(st, M)
            self.cols.append(cols)
            for t in range(self.T):
                storage_up[t].extend((c, 1.0) for c in cols.ru[:, t])
                storage_down[t].extend((c, 1.0) for c in cols.rd[:, t])
        self.add_system_rows(storage_up, storage_down)

    def _fill_logic(self, name: str, seg_cols, widths) -> list[int]:
        lp = self.lp
        binaries = []
        for k in range(len(widths) - 1):
            v = self.mip.add_binary(f"v[{name},{k}]")
            lp.add_row(f"full[{name},{k}]", [(v, widths[k]), (seg_cols[k], -1.0)], "<=", 0.0)
            lp.add_row(f"empty[{name},{k}]", [(seg_cols[k + 1], 1.0), (v, -widths[k + 1])],
                       "<=", 0.0)
            binaries.append(v)
        return binaries

    def _add_storage(self, st: StorageAsset, M: float) -> _StorageCols:
        lp, T = self.lp, self.T
        bid = st.bid
        K, eta, n = bid.n_segments, bid.efficiency, st.name
        w = bid.widths
        e = np.zeros((K, T + 1), dtype=int)
        ru = np.zeros((K, T), dtype=int)
        rd = np.zeros((K, T), dtype=int)
        skip = np.zeros((2, T), dtype=int)
        fill = {}
        e0 = fill_form(bid, st.initial_soc)
        for k in range(K):
            e[k, 0] = lp.add_var(f"e[{n},{k},0]", e0[k], e0[k])
        for t in range(T):
            tag = f"{n},{t}"
            for k in range(K):
                e[k, t + 1] = lp.add_var(f"e[{n},{k},{t + 1}]", 0.0, w[k])
                ru[k, t] = lp.add_var(f"ru[{tag},{k}]", 0.0, w[k], bid.up_costs[k])
                rd[k, t] = lp.add_var(f"rd[{tag},{k}]", 0.0, w[k] / eta, bid.down_costs[k])
                lp.add_row(f"soc[{tag},{k}]", [(e[k, t], 1.0), (rd[k, t], eta), (ru[k, t], -1.0),
                                               (e[k, t + 1], -1.0)], "=", 0.0)
            if np.isfinite(st.reg_up_cap):
                lp.add_row(f"cap_up[{tag}]", [(c, 1.0) for c in ru[:, t]], "<=", st.reg_up_cap)
            if np.isfinite(st.reg_down_cap):
                lp.add_row(f"cap_down[{tag}]", [(c, 1.0) for c in rd[:, t]], "<=",
                           st.reg_down_cap)

            s1 = self.mip.add_binary(f"skip1[{tag}]")
            s2 = self.mip.add_binary(f"skip2[{tag}]")
            lp.add_row(f"route[{tag}]", [(s1, 1.0), (s2, 1.0)], "=", 1.0)
            skip[:, t] = (s1, s2)

            # route 1: down to the midpoint m1, then up to e[t+1]
            rd1 = [lp.add_var(f"rd1[{tag},{k}]", 0.0, w[k] / eta) for k in range(K)]
            ru1 = [lp.add_var(f"ru1[{tag},{k}]", 0.0, w[k]) for k in range(K)]
            m1 = [lp.add_var(f"m1[{tag},{k}]", 0.0, w[k]) for k in range(K)]
            # route 2: up to the midpoint m2, then down to e[t+1]
            ru2 = [lp.add_var(f"ru2[{tag},{k}]", 0.0, w[k]) for k in range(K)]
            rd2 = [lp.add_var(f"rd2[{tag},{k}]", 0.0, w[k] / eta) for k in range(K)]
            m2 = [lp.add_var(f"m2[{tag},{k}]", 0.0, w[k]) for k in range(K)]
            for k in range(K):
                lp.add_row(f"r1a[{tag},{k}]", [(e[k, t], 1.0), (rd1[k], eta), (m1[k], -1.0)],
                           "=", 0.0)
                lp.add_row(f"r1b[{tag},{k}]", [(m1[k], 1.0), (ru1[k], -1.0), (e[k, t + 1], -1.0)],
                           "=", 0.0)
                lp.add_row(f"r2a[{tag},{k}]", [(e[k, t], 1.0), (ru2[k], -1.0), (m2[k], -1.0)],
                           "=", 0.0)
                lp.add_row(f"r2b[{tag},{k}]", [(m2[k], 1.0), (rd2[k], eta), (e[k, t + 1], -1.0)],
                           "=", 0.0)
                for label, route_col, cleared, s in (("J1d", rd1[k], rd[k, t], s1),
                                                     ("J1u", ru1[k], ru[k, t], s1),
                                                     ("J2d", rd2[k], rd[k, t], s2),
                                                     ("J2u", ru2[k], ru[k, t], s2)):
                    lp.add_row(f"{label}[{tag},{k}]",
                               [(route_col, 1.0), (cleared, -1.0), (s, -M)], "<=", 0.0)
            for label, route_cols, cleared in (("T1d", rd1, rd[:, t]), ("T1u", ru1, ru[:, t]),
                                               ("T2d", rd2, rd[:, t]), ("T2u", ru2, ru[:, t])):
                lp.add_row(f"{label}[{tag}]", [(c, 1.0) for c in route_cols]
                           + [(c, -1.0) for c in cleared], "=", 0.0)
            fill[("e", t)] = self._fill_logic(f"e,{tag}", e[:, t + 1], w)
            fill[("m1", t)] = self._fill_logic(f"m1,{tag}", m1, w)
            fill[("m2", t)] = self._fill_logic(f"m2,{tag}", m2, w)
        return _StorageCols(e, ru, rd, fill, skip)

    # -- heuristic -------------------------------------------------------------
    def fixings_from_totals(self, r_up: np.ndarray, r_down: np.ndarray) -> dict[int, float]:
        """Binary values implied by aggregate capacities on the full-utilization path.

        The route for each interval is the cheaper ordering when both keep
        the SoC in range (route 1 on ties).
        """
        fix: dict[int, float] = {}
        for s, (st, cols) in enumerate(zip(self.p.storages, self.cols)):
            bid = st.bid
            eta = bid.efficiency
            soc = st.initial_soc
            lo, hi = bid.soc_min - FILL_TOL, bid.soc_max + FILL_TOL
            for t in range(self.T):
                u, d = float(r_up[s, t]), float(r_down[s, t])
                mid1, mid2 = soc + eta * d, soc - u
                nxt = soc + eta * d - u
                cost1 = cost2 = np.inf
                if lo <= mid1 <= hi:
                    cost1 = _leg_cost(bid, soc, (f_down, d), (f_up, u), mid1)
                if lo <= mid2 <= hi:
                    cost2 = _leg_cost(bid, soc, (f_up, u), (f_down, d), mid2)
                use_two = cost2 < cost1 - 1e-12
                fix[int(cols.skip[0, t])] = 1.0 if use_two else 0.0
                fix[int(cols.skip[1, t])] = 0.0 if use_two else 1.0
                for kind, value in (("e", nxt), ("m1", mid1), ("m2", mid2)):
                    value = min(max(value, bid.soc_min), bid.soc_max)
                    for col, v in zip(cols.fill[(kind, t)], fill_binaries(bid, value)):
                        fix[int(col)] = float(v)
                soc = nxt
        return fix

    def storage_totals(self, x: np.ndarray):
        r_u = np.array([x[c.ru].sum(axis=0) for c in self.cols]).reshape(-1, self.T)
        r_d = np.array([x[c.rd].sum(axis=0) for c in self.cols]).reshape(-1, self.T)
        return np.maximum(r_u, 0.0), np.maximum(r_d, 0.0)


def _leg_cost(bid: SegmentedBid, start: float, first, second, mid: float) -> float:
    try:
        return first[0](first[1], start, bid, 1.0) + second[0](second[1], mid, bid, 1.0)
    except SocRangeError:
        return np.inf


def clear_mip(problem: ClearingProblem, options: SolverOptions | None = None,
              big_m: float | None = None, warm_start: ClearingResult | None = None
              ) -> ClearingResult:
    """Clear with per-segment SoC tracking and route selection (any valid bids).

    ``warm_start`` (typically a convex clearing of the same problem) seeds
    the root heuristic with its storage capacities. The result's ``gap``
    and ``status`` report whether branch and bound proved optimality within
    the node limit.
    """
    problem.require_valid()
    model = SegmentModel(problem, big_m)
    opts = options or SolverOptions.from_env()
    pending = [warm_start] if warm_start is not None else []

    def heuristic(x: np.ndarray):
        if pending:
            warm = pending.pop()
            return model.fixings_from_totals(warm.r_u, warm.r_d)
        return model.fixings_from_totals(*model.storage_totals(x))

    sol = solve_mip(model.mip, opts, heuristic)
    if sol.status not in ("optimal", "node_limit") or sol.x.size == 0:
        raise SolverError(f"MIP clearing failed: {sol.status}", sol.status)
    x = sol.x
    g_e, g_u, g_d = model.generator_values(x)
    r_u, r_d = model.storage_totals(x)
    S = len(problem.storages)
    soc = np.zeros((S, model.T + 1))
    storage_cost = np.zeros(S)
    for s, (st, cols) in enumerate(zip(problem.storages, model.cols)):
        soc[s] = x[cols.e].sum(axis=0) + st.bid.soc_min
        storage_cost[s] = float(np.asarray(st.bid.up_costs) @ x[cols.ru].sum(axis=1)
                                + np.asarray(st.bid.down_costs) @ x[cols.rd].sum(axis=1))
    beta_u, beta_d, energy = model.prices(sol)
    if sol.status != "optimal":
        log.warning("MIP clearing stopped at the node limit with relative gap %.3g", sol.gap)
    return ClearingResult(
        method="mip", status=sol.status, objective=sol.objective,
        g_e=g_e, g_u=g_u, g_d=g_d, r_u=r_u, r_d=r_d, soc=soc,
        price_up=beta_u, price_down=beta_d, energy_price=energy,
        storage_cost=storage_cost, generator_names=[g.name for g in problem.generators],
        storages=problem.storages, gap=sol.gap, nodes=sol.nodes, degenerate=sol.degenerate,
        meta={"iterations": sol.iterations, "lp": model.lp, "solution": sol,
              "binaries": model.mip.binaries, "big_m": model.big_m},
    )
