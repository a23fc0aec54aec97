"""Storage regulation cost functions.

Single-step costs follow the segment-area construction: a regulation-down
step charges the battery from ``y`` to ``y + eta*x*delta`` and pays the
down cost of every segment it passes through; a regulation-up step
discharges from ``y`` to ``y - x*delta`` and pays the up costs. Under an
EDCR bid the trajectory cost collapses to a max of affine pieces that
depends only on the total mileage, which is what the closed-form helpers
evaluate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bids import SegmentedBid, require_edcr, segment_index
from .errors import SocRangeError

#: Length of one AGC step in hours (4 seconds).
AGC_STEP_HOURS = 4.0 / 3600.0
SOC_TOL = 1e-9


@dataclass(frozen=True)
class MileageTrajectory:
    """Regulation mileage (MW) per AGC step within one market interval."""

    up: tuple[float, ...]
    down: tuple[float, ...]
    step_hours: float = AGC_STEP_HOURS

    def __post_init__(self):
        up = tuple(float(v) for v in self.up)
        down = tuple(float(v) for v in self.down)
        if len(up) != len(down):
            raise ValueError("up and down mileage must have the same length")
        for j, (u, d) in enumerate(zip(up, down)):
            if u < 0 or d < 0:
                raise ValueError(f"negative mileage at step {j}")
            if u * d != 0:
                raise ValueError(f"simultaneous up and down mileage at step {j}")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @property
    def steps(self) -> int:
        return len(self.up)

    @property
    def up_energy(self) -> float:
        return float(sum(self.up)) * self.step_hours

    @property
    def down_energy(self) -> float:
        return float(sum(self.down)) * self.step_hours

    @classmethod
    def from_energies(cls, signed: Sequence[float], step_hours: float = AGC_STEP_HOURS):
        """Build from per-step energies: positive = regulation down, negative = up."""
        up = [max(-v, 0.0) / step_hours for v in signed]
        down = [max(v, 0.0) / step_hours for v in signed]
        return cls(tuple(up), tuple(down), step_hours)


def _prefix(bid: SegmentedBid, decrements: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix sums of ``D_i`` and ``D_i * E_{i+1}`` used by the crossing terms."""
    bp = np.asarray(bid.breakpoints)
    p0 = np.concatenate([[0.0], np.cumsum(decrements)])
    p1 = np.concatenate([[0.0], np.cumsum(decrements * bp[1:-1])])
    return p0, p1


def _check_range(bid: SegmentedBid, soc, what: str):
    soc = np.asarray(soc, dtype=float)
    bad = (soc < bid.soc_min - SOC_TOL) | (soc > bid.soc_max + SOC_TOL)
    if np.any(bad):
        raise SocRangeError(
            f"{what} SoC outside [{bid.soc_min}, {bid.soc_max}]: "
            f"{soc[bad].ravel()[:3].tolist()}"
        )


def down_step_cost(bid: SegmentedBid, energy, start, check: bool = True):
    """Cost of drawing ``energy`` MWh from the grid starting at SoC ``start``.

    Vectorized over ``energy`` and ``start``.
    """
    energy = np.asarray(energy, dtype=float)
    start = np.asarray(start, dtype=float)
    end = start + bid.efficiency * energy
    if check:
        _check_range(bid, start, "start")
        _check_range(bid, end, "end")
    ad = np.asarray(bid.down_costs)
    m = segment_index(bid, start)
    n = segment_index(bid, end)
    p0, p1 = _prefix(bid, bid.down_decrements)
    crossing = ((p1[n] - p1[m]) - start * (p0[n] - p0[m])) / bid.efficiency
    return ad[n] * energy + np.where(n > m, crossing, 0.0)


def up_step_cost(bid: SegmentedBid, energy, start, check: bool = True):
    """Cost of delivering ``energy`` MWh to the grid starting at SoC ``start``."""
    energy = np.asarray(energy, dtype=float)
    start = np.asarray(start, dtype=float)
    end = start - energy
    if check:
        _check_range(bid, start, "start")
        _check_range(bid, end, "end")
    au = np.asarray(bid.up_costs)
    m = segment_index(bid, start)
    n = segment_index(bid, end)
    p0, p1 = _prefix(bid, bid.up_decrements)
    crossing = (p1[m] - p1[n]) - start * (p0[m] - p0[n])
    return au[n] * energy + np.where(n < m, crossing, 0.0)


def f_down(x: float, y: float, bid: SegmentedBid, delta: float = AGC_STEP_HOURS) -> float:
    """Regulation-down cost of mileage ``x`` (MW) over one step starting at SoC ``y``."""
    return float(down_step_cost(bid, x * delta, y))


def f_up(x: float, y: float, bid: SegmentedBid, delta: float = AGC_STEP_HOURS) -> float:
    """Regulation-up cost of mileage ``x`` (MW) over one step starting at SoC ``y``."""
    return float(up_step_cost(bid, x * delta, y))


def soc_path(traj: MileageTrajectory, e0: float, bid: SegmentedBid) -> np.ndarray:
    """Intra-interval SoC at the start of every step plus the final value (length J+1)."""
    moves = (np.asarray(traj.down) * bid.efficiency - np.asarray(traj.up)) * traj.step_hours
    return e0 + np.concatenate([[0.0], np.cumsum(moves)])


def f_b(traj: MileageTrajectory, e0: float, bid: SegmentedBid) -> float:
    """Total stepwise cost of a mileage trajectory."""
    path = soc_path(traj, e0, bid)
    total = 0.0
    for j in range(traj.steps):
        try:
            total += f_up(traj.up[j], path[j], bid, traj.step_hours)
            total += f_down(traj.down[j], path[j], bid, traj.step_hours)
        except SocRangeError as exc:
            raise SocRangeError(f"step {j}: {exc}", index=j) from None
    return total


def _alpha_terms(bid: SegmentedBid) -> np.ndarray:
    """``sum_{k<j} Δa^d_k (E_{k+1} - E_1)`` for every segment j."""
    bp = np.asarray(bid.breakpoints)
    return np.concatenate([[0.0], np.cumsum(bid.down_decrements * (bp[1:-1] - bp[0]))])


def closed_form_h(bid: SegmentedBid, s: float) -> float:
    ad = bid.down_costs
    i = bid.segment(s)
    q = _alpha_terms(bid)
    return (ad[i] * (bid.soc_min - s) - q[i]) / bid.efficiency


def closed_form_alpha(bid: SegmentedBid, s: float, j: int) -> float:
    """Intercept of affine piece ``j`` (0-based) at initial SoC ``s``."""
    q = _alpha_terms(bid)
    return (q[j] + bid.down_costs[j] * (s - bid.soc_min)) / bid.efficiency + closed_form_h(bid, s)


def alphas(bid: SegmentedBid, s: float) -> np.ndarray:
    return np.array([closed_form_alpha(bid, s, j) for j in range(bid.n_segments)])


def interval_soc_path(bid: SegmentedBid, r_up, r_down, s: float) -> np.ndarray:
    """Interval-level SoC ``e_1..e_{T+1}`` when cleared capacity is fully used."""
    r_up = np.atleast_1d(np.asarray(r_up, dtype=float))
    r_down = np.atleast_1d(np.asarray(r_down, dtype=float))
    return s + np.concatenate([[0.0], np.cumsum(r_down * bid.efficiency - r_up)])


def edcr_cost_pieces(bid: SegmentedBid, r_up, r_down, s: float) -> np.ndarray:
    r_up = np.atleast_1d(np.asarray(r_up, dtype=float))
    r_down = np.atleast_1d(np.asarray(r_down, dtype=float))
    return (alphas(bid, s) + np.asarray(bid.down_costs) * r_down.sum()
            + np.asarray(bid.up_costs) * r_up.sum())


def edcr_cost(bid: SegmentedBid, r_up, r_down, s: float, check: bool = True) -> float:
    """Horizon worst-case cost of an EDCR bid for cleared capacities ``r_up``/``r_down``."""
    if check:
        require_edcr(bid)
        path = interval_soc_path(bid, r_up, r_down, s)
        bad = np.nonzero((path < bid.soc_min - SOC_TOL) | (path > bid.soc_max + SOC_TOL))[0]
        if bad.size:
            raise SocRangeError(f"SoC path leaves bid range at t={int(bad[0])}", int(bad[0]))
    return float(np.max(edcr_cost_pieces(bid, r_up, r_down, s)))


def active_segment(bid: SegmentedBid, r_up, r_down, s: float) -> int:
    """Maximizing piece, smallest index on ties."""
    pieces = edcr_cost_pieces(bid, r_up, r_down, s)
    return int(np.flatnonzero(pieces >= pieces.max() - 1e-12)[0])


def _in_range(bid: SegmentedBid, *values: float) -> bool:
    return all(bid.soc_min - SOC_TOL <= v <= bid.soc_max + SOC_TOL for v in values)


def approx_cost_fcheck(bid: SegmentedBid, r_up: float, r_down: float, e: float,
                       delta: float = AGC_STEP_HOURS) -> float:
    """Cheaper of the two single-pass orderings of the cleared capacities.

    Either all regulation up is used first and then all regulation down, or
    the reverse; each leg is one step of mileage ``r/delta``. An ordering
    whose SoC excursion leaves the bid range is skipped.
    """
    eta = bid.efficiency
    options = []
    mid = e - r_up
    if _in_range(bid, e, mid, mid + eta * r_down):
        options.append(f_up(r_up / delta, e, bid, delta) + f_down(r_down / delta, mid, bid, delta))
    mid = e + eta * r_down
    if _in_range(bid, e, mid, mid - r_up):
        options.append(f_down(r_down / delta, e, bid, delta) + f_up(r_up / delta, mid, bid, delta))
    if not options:
        raise SocRangeError(
            f"both orderings leave the SoC range (e={e}, r_up={r_up}, r_down={r_down})"
        )
    return min(options)


def approx_cost_path(bid: SegmentedBid, r_up, r_down, s: float) -> float:
    """Sum of per-interval approximate costs along the full-utilization SoC path."""
    path = interval_soc_path(bid, r_up, r_down, s)
    return float(sum(
        approx_cost_fcheck(bid, float(u), float(d), float(path[t]))
        for t, (u, d) in enumerate(zip(np.atleast_1d(r_up), np.atleast_1d(r_down)))
    ))
