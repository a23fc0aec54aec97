"""Problem and solution containers for the in-house LP/MIP solver."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

INF = float("inf")
SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class SolverOptions:
    pivot_tol: float = 1e-9
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    max_iter: int = 100_000
    bland_after: int = 50
    refactor_every: int = 200
    gap_tol: float = 1e-6
    node_limit: int = 2000
    int_tol: float = 1e-6
    method: str = "auto"  # "dense" tableau, "revised" sparse LU, or size-based "auto"

    def __post_init__(self):
        if self.method not in ("auto", "dense", "revised"):
            raise ValueError(f"unknown simplex method {self.method!r}")

    @classmethod
    def env_values(cls) -> dict:
        """``SOCREG_<FIELD>`` environment settings, e.g. ``SOCREG_FEAS_TOL=1e-8``."""
        values = {}
        for name, spec in cls.__dataclass_fields__.items():
            raw = os.environ.get(f"SOCREG_{name.upper()}")
            if raw is None:
                continue
            kind = type(spec.default)
            values[name] = raw if kind is str else kind(float(raw))
        return values

    @classmethod
    def from_env(cls, **base) -> "SolverOptions":
        """Options from ``base`` (e.g. a config file) with environment settings on top."""
        merged = {k: v for k, v in base.items() if v is not None}
        merged.update(cls.env_values())
        return cls(**merged)


class LinearProgram:
    """Minimization LP in row form with named rows and columns.

    Rows are ``sum_j a_ij x_j (<=|>=|=) b_i``; columns carry bounds and an
    objective coefficient. Coefficients are stored sparsely and densified on
    demand for the simplex.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.col_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.cost: list[float] = []
        self.row_names: list[str] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self._rows: list[dict[int, float]] = []
        self._col_index: dict[str, int] = {}
        self._row_index: dict[str, int] = {}
        self.objective_offset = 0.0

    @property
    def n_cols(self) -> int:
        return len(self.col_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, cost: float = 0.0) -> int:
        if name in self._col_index:
            raise ValueError(f"duplicate column name {name!r}")
        if lb > ub:
            raise ValueError(f"column {name!r} has lb {lb} > ub {ub}")
        self._col_index[name] = len(self.col_names)
        self.col_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.cost.append(float(cost))
        return self._col_index[name]

    def add_row(self, name: str, coeffs: Mapping[int, float] | Iterable[tuple[int, float]],
                sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if name in self._row_index:
            raise ValueError(f"duplicate row name {name!r}")
        if not np.isfinite(rhs):
            raise ValueError(f"row {name!r} has non-finite right-hand side {rhs}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        row: dict[int, float] = {}
        for j, a in items:
            if not 0 <= j < self.n_cols:
                raise IndexError(f"row {name!r} references unknown column {j}")
            row[j] = row.get(j, 0.0) + float(a)
        self._row_index[name] = len(self.row_names)
        self.row_names.append(name)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self._rows.append(row)
        return self._row_index[name]

    def col(self, name: str) -> int:
        return self._col_index[name]

    def row(self, name: str) -> int:
        return self._row_index[name]

    def row_coeffs(self, i: int) -> dict[int, float]:
        return dict(self._rows[i])

    def set_bounds(self, j: int, lb: float, ub: float) -> None:
        self.lb[j] = float(lb)
        self.ub[j] = float(ub)

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.n_rows, self.n_cols))
        for i, row in enumerate(self._rows):
            for j, a in row.items():
                A[i, j] = a
        return A

    def arrays(self):
        """``(c, A, senses, b, lb, ub)`` as numpy arrays."""
        return (np.asarray(self.cost, dtype=float), self.matrix(), np.asarray(self.senses),
                np.asarray(self.rhs, dtype=float), np.asarray(self.lb, dtype=float),
                np.asarray(self.ub, dtype=float))


@dataclass
class LpSolution:
    status: str
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced_costs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    col_names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    iterations: int = 0
    degenerate: bool = False
    # branch-and-bound metadata
    bound: float = float("nan")
    gap: float = 0.0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def primal(self) -> dict[str, float]:
        return dict(zip(self.col_names, self.x.tolist()))

    @property
    def dual(self) -> dict[str, float]:
        return dict(zip(self.row_names, self.duals.tolist()))

    def value(self, name: str) -> float:
        return float(self.x[self.col_names.index(name)])


class MixedIntegerProgram:
    """A :class:`LinearProgram` plus columns restricted to {0, 1}."""

    def __init__(self, lp: LinearProgram, binaries: Iterable[int] = ()):
        self.lp = lp
        self.binaries: list[int] = sorted(set(binaries))
        for j in self.binaries:
            if lp.lb[j] < 0 or lp.ub[j] > 1:
                raise ValueError(f"binary column {lp.col_names[j]!r} must have bounds within [0, 1]")

    def add_binary(self, name: str, cost: float = 0.0) -> int:
        j = self.lp.add_var(name, 0.0, 1.0, cost)
        self.binaries.append(j)
        return j


def optimality_report(lp: LinearProgram, sol: LpSolution) -> dict[str, float]:
    """Primal residual, duality gap and complementary-slackness residual.

    Duals follow the shadow-price convention ``d objective / d rhs``; the
    dual objective adds reduced-cost contributions at the active bounds.
    """
    c, A, senses, b, lb, ub = lp.arrays()
    x, y = sol.x, sol.duals
    ax = A @ x
    viol = np.zeros_like(b)
    le = senses == "<="
    ge = senses == ">="
    eq = senses == "="
    viol[le] = np.maximum(ax[le] - b[le], 0)
    viol[ge] = np.maximum(b[ge] - ax[ge], 0)
    viol[eq] = np.abs(ax[eq] - b[eq])
    bound_viol = np.maximum(np.maximum(lb - x, x - ub), 0)
    primal = float(max(viol.max(initial=0.0), bound_viol.max(initial=0.0)))

    d = c - A.T @ y
    # a reduced cost may only be nonzero at a finite bound of matching sign
    lo_ok = np.isfinite(lb)
    hi_ok = np.isfinite(ub)
    d_at_lb = np.where(lo_ok, np.maximum(d, 0), 0.0)
    d_at_ub = np.where(hi_ok, np.minimum(d, 0), 0.0)
    d_infeasible = np.abs(d - d_at_lb - d_at_ub)
    bound_term = d_at_lb * np.where(lo_ok, lb, 0.0) + d_at_ub * np.where(hi_ok, ub, 0.0)
    dual_obj = float(b @ y + bound_term.sum())
    primal_obj = float(c @ x)
    gap = abs(primal_obj - dual_obj)

    cs_rows = np.abs(y * (ax - b))
    cs_cols = d_at_lb * np.where(lo_ok, x - lb, 0.0) - d_at_ub * np.where(hi_ok, ub - x, 0.0)
    dual_sign = np.concatenate([np.maximum(y[le], 0), np.maximum(-y[ge], 0), d_infeasible])
    return {
        "primal_residual": primal,
        "duality_gap": gap,
        "complementary_slackness": float(max(cs_rows.max(initial=0.0), cs_cols.max(initial=0.0))),
        "dual_sign_violation": float(dual_sign.max(initial=0.0)),
        "primal_objective": primal_obj,
        "dual_objective": dual_obj,
    }
