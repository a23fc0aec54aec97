"""Worst-case storage cost inside a market interval.

Two routes to the same quantity: an exhaustive search over discretized
AGC mileage trajectories (works for any bid, only for tiny step counts),
and the closed form that holds for EDCR bids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bids import SegmentedBid, StorageAsset, require_edcr
from .costs import (
    AGC_STEP_HOURS,
    SOC_TOL,
    MileageTrajectory,
    down_step_cost,
    edcr_cost_pieces,
    interval_soc_path,
    up_step_cost,
)
from .errors import InstanceTooLarge, SocRangeError

MAX_STEPS = 6


@dataclass(frozen=True)
class WorstCaseQuery:
    r_up: float
    r_down: float
    e0: float
    bid: SegmentedBid
    steps: int = 4
    grid_levels: int = 5
    step_hours: float = AGC_STEP_HOURS

    def __post_init__(self):
        if self.r_up < 0 or self.r_down < 0:
            raise ValueError("capacities must be nonnegative")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.grid_levels < 2:
            raise ValueError("grid_levels must be >= 2")


def _enumerate(q: WorstCaseQuery) -> tuple[np.ndarray, np.ndarray]:
    """All per-step (up, down) energy matrices of the discretized trajectory space.

    Each step is idle, pure up, or pure down; a nonzero step uses a fraction
    ``i/(L-1)`` of the budget still unspent in its direction. Fraction 1
    exhausts a budget, so the up-first and down-first corner trajectories
    (and every full-budget split) are part of the grid whenever J >= 2.
    """
    fracs = np.linspace(0.0, 1.0, q.grid_levels)[1:]
    up = np.zeros((1, 0))
    down = np.zeros((1, 0))
    rem_u = np.array([q.r_up])
    rem_d = np.array([q.r_down])
    for _ in range(q.steps):
        n = rem_u.size
        opt_u = np.concatenate([np.zeros((n, 1)), rem_u[:, None] * fracs, np.zeros((n, fracs.size))], axis=1)
        opt_d = np.concatenate([np.zeros((n, 1)), np.zeros((n, fracs.size)), rem_d[:, None] * fracs], axis=1)
        width = opt_u.shape[1]
        up = np.concatenate([np.repeat(up, width, axis=0), opt_u.reshape(-1, 1)], axis=1)
        down = np.concatenate([np.repeat(down, width, axis=0), opt_d.reshape(-1, 1)], axis=1)
        rem_u = (rem_u[:, None] - opt_u).ravel()
        rem_d = (rem_d[:, None] - opt_d).ravel()
    return up, down


def brute_force_worst_cost(q: WorstCaseQuery, max_steps: int = MAX_STEPS
                           ) -> tuple[float, MileageTrajectory]:
    """Maximize the stepwise trajectory cost over the discretized feasible set.

    Trajectories whose intra-interval SoC leaves the bid range are discarded.
    Among equal-cost maxima the one using the most total energy wins, then
    the first enumerated.
    """
    if q.steps > max_steps:
        raise InstanceTooLarge(f"{q.steps} steps exceeds the enumeration limit {max_steps}")
    bid = q.bid
    up, down = _enumerate(q)
    n_traj = up.shape[0]
    soc = np.full(n_traj, float(q.e0))
    cost = np.zeros(n_traj)
    feasible = np.ones(n_traj, dtype=bool)
    for j in range(q.steps):
        start = np.clip(soc, bid.soc_min, bid.soc_max)
        cost += up_step_cost(bid, up[:, j], start, check=False)
        cost += down_step_cost(bid, down[:, j], start, check=False)
        soc = soc + bid.efficiency * down[:, j] - up[:, j]
        feasible &= (soc >= bid.soc_min - SOC_TOL) & (soc <= bid.soc_max + SOC_TOL)
    if not feasible.any():
        raise SocRangeError("no discretized trajectory stays inside the SoC range")
    cost = np.where(feasible, cost, -np.inf)
    best = cost.max()
    tied = np.flatnonzero(cost >= best - 1e-12 * max(1.0, abs(best)))
    used = up[tied].sum(axis=1) + down[tied].sum(axis=1)
    pick = tied[int(np.argmax(used))]
    traj = MileageTrajectory(tuple(up[pick] / q.step_hours), tuple(down[pick] / q.step_hours),
                             q.step_hours)
    return float(best), traj


def _check_excursion(bid: SegmentedBid, r_up: float, r_down: float, e0: float, t=None):
    lo = e0 - r_up
    hi = e0 + bid.efficiency * r_down
    if lo < bid.soc_min - SOC_TOL or hi > bid.soc_max + SOC_TOL:
        where = "" if t is None else f" at t={t}"
        raise SocRangeError(
            f"SoC excursion [{lo:.6g}, {hi:.6g}] leaves [{bid.soc_min}, {bid.soc_max}]{where}",
            index=t,
        )


def analytical_worst_cost(bid: SegmentedBid, r_up: float, r_down: float, e0: float,
                          check: bool = True) -> float:
    """Closed-form worst case for one interval under an EDCR bid."""
    if check:
        require_edcr(bid)
        _check_excursion(bid, r_up, r_down, e0)
    return float(np.max(edcr_cost_pieces(bid, [r_up], [r_down], e0)))


def binding_trajectory(r_up: float, r_down: float, steps: int = 2,
                       step_hours: float = AGC_STEP_HOURS) -> MileageTrajectory:
    """A maximizer of the EDCR worst case: all up in step 1, all down in step 2.

    Its totals equal the cleared capacities, i.e. both budgets bind.
    """
    if steps < 2:
        raise ValueError("a binding trajectory needs at least two steps")
    up = [0.0] * steps
    down = [0.0] * steps
    up[0] = r_up / step_hours
    down[1] = r_down / step_hours
    return MileageTrajectory(tuple(up), tuple(down), step_hours)


def aggregate_worst_cost(storage: StorageAsset, r_up: Sequence[float],
                         r_down: Sequence[float]) -> float:
    """Sum of per-interval worst cases along the full-utilization SoC path."""
    bid = storage.bid
    require_edcr(bid)
    r_up = np.atleast_1d(np.asarray(r_up, dtype=float))
    r_down = np.atleast_1d(np.asarray(r_down, dtype=float))
    path = interval_soc_path(bid, r_up, r_down, storage.initial_soc)
    total = 0.0
    for t in range(r_up.size):
        _check_excursion(bid, r_up[t], r_down[t], path[t], t)
        total += analytical_worst_cost(bid, r_up[t], r_down[t], float(path[t]), check=False)
    return total
