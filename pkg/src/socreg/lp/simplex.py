"""Dense bounded-variable primal simplex with dual extraction.

Every row gets a slack column so the system is ``[A I] (x, s) = b`` with
slack bounds encoding the row sense. Rows whose slack cannot absorb the
initial residual get an artificial column; phase 1 drives those to zero.
The tableau is kept explicitly (``B^-1 [A I art]``), which is adequate for
the few-hundred-row problems this package builds.

Pivoting is Dantzig pricing with a largest-pivot tie break in the ratio
test, switching to Bland's rule after ``bland_after`` consecutive
degenerate pivots. Pivot tolerance and feasibility tolerance come from
:class:`SolverOptions` (defaults 1e-9 and 1e-7).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve

from .model import INF, LinearProgram, LpSolution, SolverOptions
from .revised import _Revised

_DEGENERATE_STEP = 1e-12
#: problems whose dense tableau would exceed this many entries use the revised method
DENSE_LIMIT = 100_000


def _starting_point(A, senses, b, lb, ub):
    """Slack bounds, artificial rows and an initial basic solution.

    Structural columns start at a finite bound (or zero when free); each
    row's slack absorbs the residual when its bounds allow, otherwise an
    artificial column of matching sign carries it.
    """
    m, n = A.shape
    slack_lb = np.where(senses == ">=", -INF, 0.0)
    slack_ub = np.where(senses == "<=", INF, 0.0)
    x_struct = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = b - A @ x_struct
    clipped = np.clip(resid, slack_lb, slack_ub)
    need_art = np.abs(resid - clipped) > 0
    art_rows = np.flatnonzero(need_art)
    n_art = art_rows.size
    sign = np.sign(resid - clipped)
    L = np.concatenate([lb, slack_lb, np.zeros(n_art)])
    U = np.concatenate([ub, slack_ub, np.full(n_art, INF)])
    x = np.zeros(n + m + n_art)
    x[:n] = x_struct
    x[n:n + m] = np.where(need_art, clipped, resid)
    x[n + m:] = np.abs(resid - clipped)[art_rows]
    basis = np.arange(n, n + m)
    basis[art_rows] = n + m + np.arange(n_art)
    return L, U, x, basis, art_rows, sign


class _Tableau:
    def __init__(self, A, senses, b, lb, ub, opts: SolverOptions):
        m, n = A.shape
        self.m, self.n, self.opts = m, n, opts
        L, U, x, basis, art_rows, sign = _starting_point(A, senses, b, lb, ub)
        n_art = art_rows.size
        full = np.zeros((m, n + m + n_art))
        full[:, :n] = A
        full[:, n:n + m] = np.eye(m)
        full[art_rows, n + m + np.arange(n_art)] = sign[art_rows]
        self.full = full
        self.b = b
        self.L, self.U, self.x = L, U, x
        self.art_start = n + m
        self.n_art = n_art
        self.basis = basis
        self.is_basic = np.zeros(full.shape[1], dtype=bool)
        self.is_basic[basis] = True
        # B is diagonal with entries +/-1, so B^-1 is itself
        diag = np.ones(m)
        diag[art_rows] = sign[art_rows]
        self.T = full * diag[:, None]
        self.iterations = 0

    @property
    def n_cols(self) -> int:
        return self.full.shape[1]

    def duals(self, cost):
        lu = self.refactor()
        return lu_solve(lu, cost[self.basis], trans=1)

    # -- core loop -----------------------------------------------------------
    def reduced_costs(self, cost):
        return cost - cost[self.basis] @ self.T

    def refactor(self, cost=None, full=False):
        B = self.full[:, self.basis]
        lu = lu_factor(B)
        nonbasic = ~self.is_basic
        rhs = self.b - self.full[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = lu_solve(lu, rhs)
        if full:
            self.T = lu_solve(lu, self.full)
        return lu

    def run(self, cost) -> str:
        opts = self.opts
        d = self.reduced_costs(cost)
        degenerate_run = 0
        bland = False
        since_refactor = 0
        since_full = 0
        cleanup_passes = 0
        while True:
            if self.iterations >= opts.max_iter:
                return "iteration_limit"
            nonbasic = ~self.is_basic
            can_inc = nonbasic & (self.x < self.U - 1e-12) & (d < -opts.opt_tol)
            can_dec = nonbasic & (self.x > self.L + 1e-12) & (d > opts.opt_tol)
            eligible = can_inc | can_dec
            if not eligible.any():
                if cleanup_passes < 3 and since_full > 0:
                    # confirm optimality on a freshly factored tableau
                    self.refactor(full=True)
                    d = self.reduced_costs(cost)
                    since_refactor = since_full = 0
                    cleanup_passes += 1
                    continue
                return "optimal"
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if d[j] < 0 else -1.0
            alpha = self.T[:, j]
            rate = direction * alpha
            xb = self.x[self.basis]
            Lb = self.L[self.basis]
            Ub = self.U[self.basis]
            limits = np.full(self.m, INF)
            dec = rate > opts.pivot_tol
            inc = rate < -opts.pivot_tol
            with np.errstate(invalid="ignore"):
                limits[dec] = (xb[dec] - Lb[dec]) / rate[dec]
                limits[inc] = (Ub[inc] - xb[inc]) / -rate[inc]
            limits = np.where(np.isnan(limits), INF, np.maximum(limits, 0.0))
            theta_row = limits.min() if self.m else INF
            theta_flip = self.U[j] - self.L[j]
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                return "unbounded"
            self.iterations += 1
            if theta_flip <= theta_row:
                self.x[j] += direction * theta_flip
                self.x[self.basis] = xb - theta_flip * rate
                degenerate_run = 0
                bland = False
                continue
            ties = np.flatnonzero(limits <= theta_row + 1e-12 * (1.0 + theta_row))
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            theta = limits[r]
            leaving = self.basis[r]
            self.x[j] += direction * theta
            self.x[self.basis] = xb - theta * rate
            self.x[leaving] = self.L[leaving] if rate[r] > 0 else self.U[leaving]
            self._pivot(r, j)
            d = d - d[j] * self.T[r]
            d[j] = 0.0
            if theta <= _DEGENERATE_STEP:
                degenerate_run += 1
                if degenerate_run > opts.bland_after:
                    bland = True
            else:
                degenerate_run = 0
                bland = False
            since_refactor += 1
            since_full += 1
            if since_refactor >= opts.refactor_every:
                self.refactor()
                since_refactor = 0

    def _pivot(self, r: int, j: int):
        T = self.T
        piv = T[r, j]
        T[r] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self.basis[r] = j

    def drive_out_artificials(self):
        """Pivot zero-valued artificials out of the basis; fix all artificials at 0."""
        start = self.art_start
        for r in range(self.m):
            if self.basis[r] < start:
                continue
            row = self.T[r, :start]
            cand = np.flatnonzero((np.abs(row) > self.opts.pivot_tol) & ~self.is_basic[:start])
            if cand.size == 0:
                continue  # redundant row; artificial stays basic at zero
            j = int(cand[np.argmax(np.abs(row[cand]))])
            self.x[self.basis[r]] = 0.0
            self._pivot(r, j)
        self.L[start:] = 0.0
        self.U[start:] = 0.0
        self.x[start:] = 0.0
        self.refactor()


def solve_arrays(c, A, senses, b, lb, ub, options: SolverOptions | None = None) -> LpSolution:
    """Solve ``min c'x`` over ``A x (senses) b, lb <= x <= ub`` from dense arrays."""
    opts = options or SolverOptions()
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(lb > ub + opts.feas_tol):
        return LpSolution("infeasible")

    senses = np.asarray(senses)
    method = opts.method
    if method == "auto":
        method = "dense" if m * (n + m) <= DENSE_LIMIT else "revised"
    tab = (_Tableau(A, senses, b, lb, ub, opts) if method == "dense"
           else _revised_from(A, senses, b, lb, ub, opts))

    n_art = tab.n_cols - tab.art_start
    if n_art:
        phase1 = np.zeros(tab.n_cols)
        phase1[tab.art_start:] = 1.0
        status = tab.run(phase1)
        if status == "iteration_limit":
            return LpSolution(status, iterations=tab.iterations)
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if tab.x[tab.art_start:].sum() > opts.feas_tol * scale:
            return LpSolution("infeasible", iterations=tab.iterations)
        tab.drive_out_artificials()

    cost = np.concatenate([c, np.zeros(tab.n_cols - n)])
    status = tab.run(cost)
    if status != "optimal":
        return LpSolution(status, iterations=tab.iterations)

    y = tab.duals(cost)
    x = tab.x[:n].copy()
    reduced = c - A.T @ y
    xb = tab.x[tab.basis]
    at_bound = (np.abs(xb - tab.L[tab.basis]) < 1e-9) | (np.abs(xb - tab.U[tab.basis]) < 1e-9)
    return LpSolution(
        status="optimal",
        objective=float(c @ x),
        x=x,
        duals=y,
        reduced_costs=reduced,
        iterations=tab.iterations,
        degenerate=bool(at_bound.any()),
    )


def _revised_from(A, senses, b, lb, ub, opts) -> _Revised:
    m, n = A.shape
    L, U, x, basis, art_rows, sign = _starting_point(A, senses, b, lb, ub)
    n_art = art_rows.size
    art = sp.csc_matrix((sign[art_rows], (art_rows, np.arange(n_art))), shape=(m, n_art))
    full = sp.hstack([sp.csc_matrix(A), sp.identity(m, format="csc"), art], format="csc")
    return _Revised(full, b, L, U, x, basis, n + m, opts)


def solve_lp(lp: LinearProgram, options: SolverOptions | None = None) -> LpSolution:
    """Solve a :class:`LinearProgram`; statuses are reported, never raised."""
    c, A, senses, b, lb, ub = lp.arrays()
    sol = solve_arrays(c, A, senses, b, lb, ub, options)
    sol.col_names = lp.col_names
    sol.row_names = lp.row_names
    if sol.optimal:
        sol.objective += lp.objective_offset
    return sol
