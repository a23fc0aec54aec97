"""Best-first branch and bound over binary columns."""

from __future__ import annotations

import heapq
import logging
from typing import Callable, Optional

import numpy as np

from .model import LpSolution, MixedIntegerProgram, SolverOptions
from .simplex import solve_arrays

log = logging.getLogger(__name__)

#: Maps a relaxed solution vector to {binary column: value} fixings, or None.
Heuristic = Callable[[np.ndarray], Optional[dict[int, float]]]

HEURISTIC_EVERY = 25


def _rounding(binaries: list[int]) -> Heuristic:
    def fix(x: np.ndarray):
        return {j: float(round(x[j])) for j in binaries}
    return fix


def solve_mip(mip: MixedIntegerProgram, options: SolverOptions | None = None,
              heuristic: Heuristic | None = None) -> LpSolution:
    """Minimize over the LP with binary restrictions.

    Nodes are explored lowest bound first (ties in creation order). The
    branching column is the most fractional binary, lowest index on ties.
    Fix-and-resolve heuristics (plain rounding plus an optional
    problem-specific one) run at the root and every ``HEURISTIC_EVERY``
    nodes. The returned duals come from the LP with every binary fixed at
    its incumbent value.
    """
    opts = options or SolverOptions()
    lp = mip.lp
    c, A, senses, b, lb0, ub0 = lp.arrays()
    bins = np.asarray(mip.binaries, dtype=int)
    heuristics = [_rounding(mip.binaries)]
    if heuristic is not None:
        heuristics.insert(0, heuristic)

    def relax(lb, ub) -> LpSolution:
        return solve_arrays(c, A, senses, b, lb, ub, opts)

    def gap_closed(bound: float, inc: float) -> bool:
        return inc - bound <= opts.gap_tol * max(1.0, abs(inc))

    incumbent: LpSolution | None = None
    inc_obj = np.inf

    def try_heuristics(x: np.ndarray, lb, ub):
        nonlocal incumbent, inc_obj
        for h in heuristics:
            fixings = h(x)
            if not fixings:
                continue
            hlb, hub = lb.copy(), ub.copy()
            ok = True
            for j, v in fixings.items():
                if v < lb[j] - opts.int_tol or v > ub[j] + opts.int_tol:
                    ok = False
                    break
                hlb[j] = hub[j] = v
            if not ok:
                continue
            sol = relax(hlb, hub)
            if sol.optimal and sol.objective < inc_obj - 1e-12:
                incumbent, inc_obj = sol, sol.objective

    root = relax(lb0, ub0)
    total_iters = root.iterations
    if not root.optimal:
        root.col_names, root.row_names = lp.col_names, lp.row_names
        return root

    heap: list[tuple[float, int, np.ndarray, np.ndarray, LpSolution]] = []
    seq = 0
    heapq.heappush(heap, (root.objective, seq, lb0.copy(), ub0.copy(), root))
    nodes = 0
    best_bound = root.objective
    try_heuristics(root.x, lb0, ub0)

    while heap:
        bound, _, lb, ub, sol = heapq.heappop(heap)
        best_bound = bound
        if incumbent is not None and gap_closed(bound, inc_obj):
            heap.clear()
            break
        if nodes >= opts.node_limit:
            heapq.heappush(heap, (bound, -1, lb, ub, sol))
            break
        nodes += 1
        xb = sol.x[bins]
        frac = np.minimum(xb - np.floor(xb), np.ceil(xb) - xb)
        if not np.any(frac > opts.int_tol):
            if sol.objective < inc_obj:
                incumbent, inc_obj = sol, sol.objective
            continue
        if nodes % HEURISTIC_EVERY == 0:
            try_heuristics(sol.x, lb, ub)
        k = int(np.argmax(frac))
        j = int(bins[k])
        for value in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = value
            child = relax(clb, cub)
            total_iters += child.iterations
            if not child.optimal:
                continue
            if incumbent is not None and gap_closed(child.objective, inc_obj):
                continue
            seq += 1
            heapq.heappush(heap, (child.objective, seq, clb, cub, child))

    if incumbent is None:
        status = "infeasible" if not heap else "node_limit"
        return LpSolution(status, bound=best_bound, nodes=nodes, iterations=total_iters,
                          col_names=lp.col_names, row_names=lp.row_names)

    lower = min([inc_obj] + [item[0] for item in heap]) if heap else inc_obj
    gap = (inc_obj - lower) / max(1.0, abs(inc_obj))
    status = "optimal" if gap <= opts.gap_tol else "node_limit"

    # reprice with binaries fixed so duals refer to a plain LP
    flb, fub = lb0.copy(), ub0.copy()
    rounded = np.round(incumbent.x[bins])
    flb[bins] = rounded
    fub[bins] = rounded
    fixed = relax(flb, fub)
    final = fixed if fixed.optimal else incumbent
    final.status = status
    final.bound = lower
    final.gap = max(gap, 0.0)
    final.nodes = nodes
    final.iterations = total_iters + fixed.iterations
    final.col_names, final.row_names = lp.col_names, lp.row_names
    final.objective += lp.objective_offset
    log.debug("branch and bound: %d nodes, objective %.6g, gap %.2e", nodes, inc_obj, gap)
    return final
