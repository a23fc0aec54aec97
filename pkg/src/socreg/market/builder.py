"""Shared LP assembly for the generator fleet, network and requirement rows.

Both clearing formulations (convex epigraph LP and the segment MIP) add
their own storage block on top of this and hand in the storage terms that
enter the regulation requirement rows.
"""

from __future__ import annotations

import numpy as np

from ..lp import LinearProgram, LpSolution
from .problem import ClearingProblem

Terms = list[tuple[int, float]]


class FleetModel:
    """Generator variables, energy balance, branch limits and requirement rows."""

    def __init__(self, problem: ClearingProblem, name: str):
        self.p = problem
        self.T = problem.horizon
        self.lp = LinearProgram(name)
        n_gen = len(problem.generators)
        # pieces[i][t] -> list of columns whose sum is g^e_it
        self.pieces: list[list[list[int]]] = [[[] for _ in range(self.T)] for _ in range(n_gen)]
        self.g_up: list[list[int | None]] = [[None] * self.T for _ in range(n_gen)]
        self.g_down: list[list[int | None]] = [[None] * self.T for _ in range(n_gen)]
        self.balance_rows: list[int] = []
        self.req_up_rows: list[int] = []
        self.req_down_rows: list[int] = []

    def add_generators(self) -> None:
        lp = self.lp
        for i, g in enumerate(self.p.generators):
            for t in range(self.T):
                cols = []
                for k, (width, slope) in enumerate(g.energy_cost):
                    cols.append(lp.add_var(f"ge[{g.name},{t},{k}]", 0.0, width, slope))
                self.pieces[i][t] = cols
                if g.reg_up_cap > 0:
                    self.g_up[i][t] = lp.add_var(f"gu[{g.name},{t}]", 0.0, g.reg_up_cap,
                                                 g.reg_up_cost)
                if g.reg_down_cap > 0:
                    self.g_down[i][t] = lp.add_var(f"gd[{g.name},{t}]", 0.0, g.reg_down_cap,
                                                   g.reg_down_cost)
                gmax = g.g_max_at(t)
                up = self.g_up[i][t]
                if np.isfinite(gmax):
                    terms = [(c, 1.0) for c in cols] + ([(up, 1.0)] if up is not None else [])
                    lp.add_row(f"gen_hi[{g.name},{t}]", terms, "<=", gmax)
                down = self.g_down[i][t]
                if g.g_min > 0 or down is not None:
                    terms = [(c, 1.0) for c in cols] + ([(down, -1.0)] if down is not None else [])
                    lp.add_row(f"gen_lo[{g.name},{t}]", terms, ">=", g.g_min)

    def add_system_rows(self, storage_up: list[Terms], storage_down: list[Terms]) -> None:
        """Energy balance, branch flow limits and the two requirement rows per interval."""
        lp, p = self.lp, self.p
        net = p.network
        S = net.shift_factors
        for t in range(self.T):
            demand = net.demand[t]
            terms = [(c, 1.0) for i in range(len(p.generators)) for c in self.pieces[i][t]]
            self.balance_rows.append(lp.add_row(f"balance[{t}]", terms, "=", float(demand.sum())))
            for line in range(S.shape[0]):
                coeffs = []
                for i, g in enumerate(p.generators):
                    sf = S[line, g.bus]
                    if sf != 0.0:
                        coeffs.extend((c, sf) for c in self.pieces[i][t])
                rhs = float(net.limits[line] + S[line] @ demand)
                lp.add_row(f"flow[{line},{t}]", coeffs, "<=", rhs)
            up = [(row[t], 1.0) for row in self.g_up if row[t] is not None]
            down = [(row[t], 1.0) for row in self.g_down if row[t] is not None]
            self.req_up_rows.append(
                lp.add_row(f"req_up[{t}]", up + storage_up[t], ">=", p.reg_up_req[t]))
            self.req_down_rows.append(
                lp.add_row(f"req_down[{t}]", down + storage_down[t], ">=", p.reg_down_req[t]))

    # -- extraction ------------------------------------------------------------
    def generator_values(self, x: np.ndarray):
        n = len(self.p.generators)
        g_e = np.zeros((n, self.T))
        g_u = np.zeros((n, self.T))
        g_d = np.zeros((n, self.T))
        for i in range(n):
            for t in range(self.T):
                g_e[i, t] = x[self.pieces[i][t]].sum()
                if self.g_up[i][t] is not None:
                    g_u[i, t] = x[self.g_up[i][t]]
                if self.g_down[i][t] is not None:
                    g_d[i, t] = x[self.g_down[i][t]]
        return g_e, g_u, g_d

    def prices(self, sol: LpSolution):
        y = sol.duals
        # requirement rows are >= in a minimization, so their shadow prices are >= 0;
        # clip solver noise
        beta_u = np.maximum(y[self.req_up_rows], 0.0)
        beta_d = np.maximum(y[self.req_down_rows], 0.0)
        energy = y[self.balance_rows].copy()
        return beta_u, beta_d, energy

