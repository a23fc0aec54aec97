"""Revised bounded-variable primal simplex on a sparse LU basis factorization.

Same pivoting rules as the dense tableau (Dantzig pricing, largest-pivot
ratio-test tie break, Bland after a run of degenerate pivots) but the
basis inverse is never formed: ``B`` is factored with SuperLU and basis
changes are appended as product-form eta vectors until the next refactor.
Per-pivot cost is then proportional to the nonzeros rather than to
``m * n``, which is what makes the segment MIP relaxations tractable.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .model import INF, SolverOptions

ETA_LIMIT = 64
_DEGENERATE_STEP = 1e-12


class _Revised:
    def __init__(self, full: sp.csc_matrix, b, L, U, x, basis, art_start, opts: SolverOptions):
        self.F = full.tocsc()
        self.FT = self.F.T.tocsr()
        self.m, self.N = self.F.shape
        self.b = b
        self.L, self.U, self.x = L, U, x
        self.basis = basis.copy()
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.art_start = art_start
        self.opts = opts
        self.iterations = 0
        self.eta_limit = min(ETA_LIMIT, opts.refactor_every)
        self.factor()

    @property
    def n_cols(self) -> int:
        return self.N

    # -- linear algebra --------------------------------------------------------
    def factor(self):
        B = self.F[:, self.basis].tocsc()
        self.lu = splu(B, permc_spec="COLAMD", options={"SymmetricMode": False})
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        z = self.lu.solve(a)
        for r, col in self.etas:
            zr = z[r] / col[r]
            z -= zr * col
            z[r] = zr
        return z

    def btran(self, c: np.ndarray) -> np.ndarray:
        v = np.array(c, dtype=float)
        for r, col in reversed(self.etas):
            # row-vector times the eta matrix: only entry r changes
            v[r] = (v[r] - (v @ col - v[r] * col[r])) / col[r]
        return self.lu.solve(v, trans="T")

    def column(self, j: int) -> np.ndarray:
        a = np.zeros(self.m)
        start, end = self.F.indptr[j], self.F.indptr[j + 1]
        a[self.F.indices[start:end]] = self.F.data[start:end]
        return a

    def recompute_x(self):
        nonbasic = ~self.is_basic
        rhs = self.b - self.F[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.ftran(rhs)

    def reduced_costs(self, cost):
        y = self.btran(cost[self.basis])
        d = cost - self.FT @ y
        d[self.basis] = 0.0
        return d

    # -- main loop -----------------------------------------------------------------
    def run(self, cost) -> str:
        opts = self.opts
        degenerate_run = 0
        bland = False
        confirmed = False
        while True:
            if self.iterations >= opts.max_iter:
                return "iteration_limit"
            d = self.reduced_costs(cost)
            nonbasic = ~self.is_basic
            can_inc = nonbasic & (self.x < self.U - 1e-12) & (d < -opts.opt_tol)
            can_dec = nonbasic & (self.x > self.L + 1e-12) & (d > opts.opt_tol)
            eligible = can_inc | can_dec
            if not eligible.any():
                if not confirmed and self.etas:
                    self.factor()
                    self.recompute_x()
                    confirmed = True
                    continue
                return "optimal"
            confirmed = False
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if d[j] < 0 else -1.0
            alpha = self.ftran(self.column(j))
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
            self.pivot(r, j, alpha)
            if theta <= _DEGENERATE_STEP:
                degenerate_run += 1
                if degenerate_run > opts.bland_after:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

    def pivot(self, r: int, j: int, alpha: np.ndarray):
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self.basis[r] = j
        self.etas.append((r, alpha))
        if len(self.etas) >= self.eta_limit:
            self.factor()
            self.recompute_x()

    def drive_out_artificials(self):
        start = self.art_start
        for r in range(self.m):
            if self.basis[r] < start:
                continue
            e = np.zeros(self.m)
            e[r] = 1.0
            row = self.FT @ self.btran(e)
            cand = np.flatnonzero((np.abs(row[:start]) > self.opts.pivot_tol)
                                  & ~self.is_basic[:start])
            if cand.size == 0:
                continue  # redundant row; artificial stays basic at zero
            j = int(cand[np.argmax(np.abs(row[cand]))])
            self.x[self.basis[r]] = 0.0
            self.pivot(r, j, self.ftran(self.column(j)))
        self.L[start:] = 0.0
        self.U[start:] = 0.0
        self.x[start:] = 0.0
        self.factor()
        self.recompute_x()

    def duals(self, cost) -> np.ndarray:
        self.factor()
        self.recompute_x()
        return self.btran(cost[self.basis])
