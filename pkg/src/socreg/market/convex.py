"""Convex clearing for EDCR bids: epigraph LP over the piecewise worst-case cost."""

from __future__ import annotations

import logging

import numpy as np

from ..bids import edcr_violations
from ..costs import alphas, edcr_cost
from ..errors import EdcrError, SolverError
from ..lp import INF, SolverOptions, solve_lp
from .builder import FleetModel
from .problem import ClearingProblem, ClearingResult

log = logging.getLogger(__name__)


class ConvexModel(FleetModel):
    """Fleet model plus, per storage, capacities, an SoC path and one epigraph variable."""

    def __init__(self, problem: ClearingProblem):
        super().__init__(problem, "clear_convex")
        T = self.T
        lp = self.lp
        self.add_generators()
        self.r_up: list[list[int]] = []
        self.r_down: list[list[int]] = []
        self.soc: list[list[int]] = []
        self.psi: list[int] = []
        storage_up = [[] for _ in range(T)]
        storage_down = [[] for _ in range(T)]
        for st in problem.storages:
            bid = st.bid
            eta = bid.efficiency
            ru = [lp.add_var(f"ru[{st.name},{t}]", 0.0, st.reg_up_cap) for t in range(T)]
            rd = [lp.add_var(f"rd[{st.name},{t}]", 0.0, st.reg_down_cap) for t in range(T)]
            e = [lp.add_var(f"e[{st.name},0]", st.initial_soc, st.initial_soc)]
            e += [lp.add_var(f"e[{st.name},{t + 1}]", bid.soc_min, bid.soc_max) for t in range(T)]
            psi = lp.add_var(f"psi[{st.name}]", -INF, INF, 1.0)
            for t in range(T):
                lp.add_row(f"soc[{st.name},{t}]",
                           [(e[t + 1], 1.0), (e[t], -1.0), (rd[t], -eta), (ru[t], 1.0)], "=", 0.0)
                lp.add_row(f"soc_hi[{st.name},{t}]", [(e[t], 1.0), (rd[t], eta)], "<=",
                           bid.soc_max)
                lp.add_row(f"soc_lo[{st.name},{t}]", [(e[t], 1.0), (ru[t], -1.0)], ">=",
                           bid.soc_min)
                storage_up[t].append((ru[t], 1.0))
                storage_down[t].append((rd[t], 1.0))
            for j, a in enumerate(alphas(bid, st.initial_soc)):
                terms = [(psi, 1.0)]
                terms += [(rd[t], -bid.down_costs[j]) for t in range(T)]
                terms += [(ru[t], -bid.up_costs[j]) for t in range(T)]
                lp.add_row(f"epi[{st.name},{j}]", terms, ">=", float(a))
            self.r_up.append(ru)
            self.r_down.append(rd)
            self.soc.append(e)
            self.psi.append(psi)
        self.add_system_rows(storage_up, storage_down)


def clear_convex(problem: ClearingProblem, options: SolverOptions | None = None) -> ClearingResult:
    """Clear energy and regulation with every storage bid entered through its epigraph.

    Refuses bids that violate the EDCR condition, since the epigraph form
    then understates the worst-case cost; use :func:`clear_mip` for those.
    """
    problem.require_valid()
    for st in problem.storages:
        bad = edcr_violations(st.bid)
        if bad:
            raise EdcrError(
                f"storage {st.name!r} bid violates EDCR at k={bad}; "
                "the convex clearing requires EDCR bids, use clear_mip instead", bad)
    model = ConvexModel(problem)
    sol = solve_lp(model.lp, options or SolverOptions.from_env())
    if not sol.optimal:
        raise SolverError(f"convex clearing failed: {sol.status}", sol.status)
    return _result(model, sol)


def _result(model: ConvexModel, sol) -> ClearingResult:
    x = sol.x
    p = model.p
    g_e, g_u, g_d = model.generator_values(x)
    r_u = np.array([x[cols] for cols in model.r_up]).reshape(len(p.storages), model.T)
    r_d = np.array([x[cols] for cols in model.r_down]).reshape(len(p.storages), model.T)
    soc = np.array([x[cols] for cols in model.soc]).reshape(len(p.storages), model.T + 1)
    psi = x[model.psi] if model.psi else np.zeros(0)
    # snap tiny negative noise so downstream range checks see clean values
    r_u = np.maximum(r_u, 0.0)
    r_d = np.maximum(r_d, 0.0)
    storage_cost = np.array([
        edcr_cost(st.bid, r_u[s], r_d[s], st.initial_soc, check=False)
        for s, st in enumerate(p.storages)
    ])
    beta_u, beta_d, energy = model.prices(sol)
    log.debug("convex clearing: objective %.6g after %d pivots", sol.objective, sol.iterations)
    return ClearingResult(
        method="lp", status=sol.status, objective=sol.objective,
        g_e=g_e, g_u=g_u, g_d=g_d, r_u=r_u, r_d=r_d, soc=soc,
        price_up=beta_u, price_down=beta_d, energy_price=energy,
        storage_cost=storage_cost, generator_names=[g.name for g in p.generators],
        storages=p.storages, degenerate=sol.degenerate, psi=psi,
        meta={"iterations": sol.iterations, "lp": model.lp, "solution": sol},
    )
