"""Market data: network, generators, clearing problems and their results."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..bids import StorageAsset
from ..errors import BidError

INF = float("inf")


@dataclass(frozen=True)
class GeneratorAsset:
    """Conventional or renewable unit.

    ``energy_cost`` is a list of ``(width, slope)`` pieces starting at zero
    output; slopes must be nondecreasing (convex cost). ``g_max`` is either a
    scalar or one value per interval (used for wind availability).
    """

    name: str
    energy_cost: tuple[tuple[float, float], ...] = ((INF, 0.0),)
    g_max: float | tuple[float, ...] = INF
    g_min: float = 0.0
    reg_up_cost: float = 0.0
    reg_down_cost: float = 0.0
    reg_up_cap: float = INF
    reg_down_cap: float = INF
    bus: int = 0

    def __post_init__(self):
        cost = self.energy_cost
        if isinstance(cost, (int, float)):
            cost = ((INF, float(cost)),)
        object.__setattr__(self, "energy_cost", tuple((float(w), float(s)) for w, s in cost))
        if not isinstance(self.g_max, (int, float)):
            object.__setattr__(self, "g_max", tuple(float(v) for v in self.g_max))

    def g_max_at(self, t: int) -> float:
        if isinstance(self.g_max, tuple):
            return self.g_max[t]
        return float(self.g_max)

    def validate(self, horizon: int | None = None) -> list[str]:
        issues = []
        slopes = [s for _, s in self.energy_cost]
        if any(b < a for a, b in zip(slopes, slopes[1:])):
            issues.append(f"{self.name}: energy cost slopes must be nondecreasing")
        if any(w <= 0 for w, _ in self.energy_cost):
            issues.append(f"{self.name}: energy cost piece widths must be positive")
        gmax = self.g_max if isinstance(self.g_max, tuple) else (self.g_max,)
        if horizon is not None and isinstance(self.g_max, tuple) and len(gmax) < horizon:
            issues.append(f"{self.name}: g_max has {len(gmax)} values, horizon is {horizon}")
        if any(self.g_min > g for g in gmax):
            issues.append(f"{self.name}: g_min exceeds g_max")
        if self.reg_up_cap < 0 or self.reg_down_cap < 0:
            issues.append(f"{self.name}: regulation caps must be nonnegative")
        return issues

    def energy_cost_value(self, g: float) -> float:
        total, left = 0.0, float(g)
        for width, slope in self.energy_cost:
            take = min(left, width)
            total += take * slope
            left -= take
            if left <= 0:
                break
        return total

    def cost(self, g_e: float, g_u: float, g_d: float) -> float:
        return self.energy_cost_value(g_e) + self.reg_up_cost * g_u + self.reg_down_cost * g_d

    def window(self, start: int, length: int) -> "GeneratorAsset":
        if isinstance(self.g_max, tuple):
            return replace(self, g_max=self.g_max[start:start + length])
        return self


@dataclass(frozen=True)
class NetworkModel:
    """DC network: shift factors ``S`` (2B x M), flow limits ``q`` and nodal demand (T x M)."""

    shift_factors: np.ndarray
    limits: np.ndarray
    demand: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "demand", np.atleast_2d(np.asarray(self.demand, dtype=float)))
        n_bus = self.demand.shape[1]
        S = np.asarray(self.shift_factors, dtype=float).reshape(-1, n_bus)
        object.__setattr__(self, "shift_factors", S)
        object.__setattr__(self, "limits", np.asarray(self.limits, dtype=float).reshape(-1))

    @property
    def n_buses(self) -> int:
        return self.demand.shape[1]

    @classmethod
    def single_bus(cls, demand: Sequence[float]) -> "NetworkModel":
        d = np.asarray(demand, dtype=float).reshape(-1, 1)
        return cls(np.zeros((0, 1)), np.zeros(0), d)

    def validate(self) -> list[str]:
        issues = []
        if self.shift_factors.shape[0] != self.limits.size:
            issues.append("shift factor rows and branch limits differ in length")
        if np.any(self.limits < 0):
            issues.append("branch limits must be nonnegative")
        return issues

    def window(self, start: int, length: int) -> "NetworkModel":
        return NetworkModel(self.shift_factors, self.limits, self.demand[start:start + length])


@dataclass(frozen=True)
class ClearingProblem:
    network: NetworkModel
    generators: tuple[GeneratorAsset, ...]
    storages: tuple[StorageAsset, ...]
    reg_up_req: tuple[float, ...]
    reg_down_req: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "storages", tuple(self.storages))
        object.__setattr__(self, "reg_up_req", tuple(float(v) for v in self.reg_up_req))
        object.__setattr__(self, "reg_down_req", tuple(float(v) for v in self.reg_down_req))

    @property
    def horizon(self) -> int:
        return len(self.reg_up_req)

    def validate(self) -> list[str]:
        T = self.horizon
        issues = list(self.network.validate())
        if len(self.reg_down_req) != T:
            issues.append("regulation requirement series differ in length")
        if self.network.demand.shape[0] < T:
            issues.append(f"demand covers {self.network.demand.shape[0]} intervals, horizon is {T}")
        if any(v < 0 for v in self.reg_up_req + self.reg_down_req):
            issues.append("regulation requirements must be nonnegative")
        for g in self.generators:
            issues.extend(g.validate(T))
            if not 0 <= g.bus < self.network.n_buses:
                issues.append(f"{g.name}: bus {g.bus} out of range")
        for s in self.storages:
            issues.extend(f"{s.name}: {msg}" for msg in s.validate())
        return issues

    def require_valid(self) -> None:
        issues = self.validate()
        if issues:
            raise BidError("invalid clearing problem: " + "; ".join(issues))

    def window(self, start: int, length: int, socs: Sequence[float] | None = None
               ) -> "ClearingProblem":
        """Sub-problem over ``[start, start+length)`` with optional new initial SoCs."""
        storages = self.storages
        if socs is not None:
            storages = tuple(s.with_soc(v) for s, v in zip(storages, socs))
        return ClearingProblem(
            self.network.window(start, length),
            tuple(g.window(start, length) for g in self.generators),
            storages,
            self.reg_up_req[start:start + length],
            self.reg_down_req[start:start + length],
        )


@dataclass
class ClearingResult:
    method: str
    status: str
    objective: float
    g_e: np.ndarray
    g_u: np.ndarray
    g_d: np.ndarray
    r_u: np.ndarray
    r_d: np.ndarray
    soc: np.ndarray
    price_up: np.ndarray
    price_down: np.ndarray
    energy_price: np.ndarray
    storage_cost: np.ndarray
    generator_names: list[str]
    storages: tuple[StorageAsset, ...]
    gap: float = 0.0
    nodes: int = 0
    degenerate: bool = False
    psi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.price_up.size

    def generator_cost(self, problem: ClearingProblem) -> float:
        return float(sum(
            g.cost(self.g_e[i, t], self.g_u[i, t], self.g_d[i, t])
            for i, g in enumerate(problem.generators) for t in range(self.horizon)
        ))

    def rows(self) -> list[dict]:
        """Long-format records, one per (entity, t)."""
        out = []
        for i, name in enumerate(self.generator_names):
            for t in range(self.horizon):
                out.append({
                    "entity": "generator", "name": name, "t": t,
                    "g_e": self.g_e[i, t], "g_u": self.g_u[i, t], "g_d": self.g_d[i, t],
                    "r_u": "", "r_d": "", "soc": "",
                    "price_up": self.price_up[t], "price_down": self.price_down[t],
                })
        for s, st in enumerate(self.storages):
            for t in range(self.horizon):
                out.append({
                    "entity": "storage", "name": st.name, "t": t,
                    "g_e": "", "g_u": "", "g_d": "",
                    "r_u": self.r_u[s, t], "r_d": self.r_d[s, t], "soc": self.soc[s, t],
                    "price_up": self.price_up[t], "price_down": self.price_down[t],
                })
        return out
