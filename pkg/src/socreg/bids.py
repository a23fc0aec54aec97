"""Segmented SoC-dependent regulation bids.

A bid partitions the state-of-charge axis into ``K`` segments
``[E_k, E_{k+1}]`` and attaches a regulation-up and a regulation-down
marginal cost to each segment. Indices are 0-based in code; messages
report 1-based segment numbers to match the usual notation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BidError, EdcrError

EDCR_TOL = 1e-9


@dataclass(frozen=True)
class SegmentedBid:
    breakpoints: tuple[float, ...]
    up_costs: tuple[float, ...]
    down_costs: tuple[float, ...]
    efficiency: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in self.breakpoints))
        object.__setattr__(self, "up_costs", tuple(float(v) for v in self.up_costs))
        object.__setattr__(self, "down_costs", tuple(float(v) for v in self.down_costs))
        object.__setattr__(self, "efficiency", float(self.efficiency))

    @property
    def n_segments(self) -> int:
        return len(self.up_costs)

    @property
    def soc_min(self) -> float:
        return self.breakpoints[0]

    @property
    def soc_max(self) -> float:
        return self.breakpoints[-1]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.breakpoints))

    @property
    def up_decrements(self) -> np.ndarray:
        """``a^u_k - a^u_{k+1}`` for k = 1..K-1 (nonnegative under monotonicity)."""
        return -np.diff(np.asarray(self.up_costs))

    @property
    def down_decrements(self) -> np.ndarray:
        """``a^d_k - a^d_{k+1}`` for k = 1..K-1 (nonpositive under monotonicity)."""
        return -np.diff(np.asarray(self.down_costs))

    def segment(self, soc: float) -> int:
        """Segment index holding ``soc``; the top breakpoint belongs to the last segment."""
        return int(segment_index(self, np.asarray(soc, dtype=float)))

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "up_costs": list(self.up_costs),
            "down_costs": list(self.down_costs),
            "efficiency": self.efficiency,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SegmentedBid":
        try:
            return cls(
                breakpoints=data["breakpoints"],
                up_costs=data["up_costs"],
                down_costs=data["down_costs"],
                efficiency=data.get("efficiency", 1.0),
            )
        except KeyError as exc:
            raise BidError(f"bid is missing field {exc.args[0]!r}") from None

    @classmethod
    def flat(cls, soc_min: float, soc_max: float, up_cost: float, down_cost: float,
             efficiency: float = 1.0) -> "SegmentedBid":
        """SoC-independent bid (a single segment)."""
        return cls((soc_min, soc_max), (up_cost,), (down_cost,), efficiency)


def segment_index(bid: SegmentedBid, soc):
    """Vectorized segment lookup with the half-open ``E_k <= e < E_{k+1}`` rule."""
    inner = np.asarray(bid.breakpoints[1:-1])
    return np.searchsorted(inner, soc, side="right")


@dataclass(frozen=True)
class StorageAsset:
    bid: SegmentedBid
    initial_soc: float
    reg_up_cap: float = float("inf")
    reg_down_cap: float = float("inf")
    name: str = "storage"
    bus: int = 0

    def validate(self) -> list[str]:
        issues = validate(self.bid)
        if self.bid.breakpoints and not (
            self.bid.soc_min <= self.initial_soc <= self.bid.soc_max
        ):
            issues.append(
                f"initial SoC {self.initial_soc} outside [{self.bid.soc_min}, {self.bid.soc_max}]"
            )
        if self.reg_up_cap < 0:
            issues.append("reg_up_cap is negative")
        if self.reg_down_cap < 0:
            issues.append("reg_down_cap is negative")
        return issues

    def with_bid(self, bid: SegmentedBid) -> "StorageAsset":
        return StorageAsset(bid, self.initial_soc, self.reg_up_cap, self.reg_down_cap,
                            self.name, self.bus)

    def with_soc(self, soc: float) -> "StorageAsset":
        return StorageAsset(self.bid, soc, self.reg_up_cap, self.reg_down_cap,
                            self.name, self.bus)


def validate(bid: SegmentedBid) -> list[str]:
    """Return a list of human-readable invariant violations (empty when valid)."""
    issues: list[str] = []
    K = len(bid.up_costs)
    if K < 1:
        issues.append("bid needs at least one segment")
    if len(bid.down_costs) != K:
        issues.append(f"down_costs has {len(bid.down_costs)} entries, expected {K}")
    if len(bid.breakpoints) != K + 1:
        issues.append(f"breakpoints has {len(bid.breakpoints)} entries, expected {K + 1}")
    if not np.isfinite(bid.efficiency) or not 0 < bid.efficiency <= 1:
        issues.append(f"efficiency {bid.efficiency} not in (0, 1]")
    for k in range(len(bid.breakpoints) - 1):
        if not bid.breakpoints[k] < bid.breakpoints[k + 1]:
            issues.append(f"breakpoints not strictly increasing at k={k + 1}")
    for k, a in enumerate(bid.up_costs):
        if not a >= 0:
            issues.append(f"a^u negative at k={k + 1}")
    for k, a in enumerate(bid.down_costs):
        if not a >= 0:
            issues.append(f"a^d negative at k={k + 1}")
    for k in range(K - 1):
        if bid.up_costs[k + 1] > bid.up_costs[k]:
            issues.append(f"a^u not nonincreasing at k={k + 1}")
    for k in range(min(K, len(bid.down_costs)) - 1):
        if bid.down_costs[k + 1] < bid.down_costs[k]:
            issues.append(f"a^d not nondecreasing at k={k + 1}")
    return issues


def edcr_violations(bid: SegmentedBid, tol: float = EDCR_TOL) -> list[int]:
    """1-based interior breakpoints ``k`` where the decremental-cost ratio differs from eta.

    The ratio ``(a^d_{k-1} - a^d_k) / (a^u_k - a^u_{k-1})`` is compared in
    cross-multiplied form so a flat pair of segments (zero denominator) only
    passes when the numerator is also zero.
    """
    au, ad, eta = bid.up_costs, bid.down_costs, bid.efficiency
    failing = []
    for k in range(1, len(au)):
        num = ad[k - 1] - ad[k]
        den = au[k] - au[k - 1]
        scale = max(abs(ad[k - 1]), abs(ad[k]), abs(au[k - 1]), abs(au[k]), 1e-300)
        if abs(num - eta * den) > tol * scale:
            failing.append(k + 1)
    return failing


def check_edcr(bid: SegmentedBid, tol: float = EDCR_TOL) -> bool:
    return not edcr_violations(bid, tol)


def require_edcr(bid: SegmentedBid, tol: float = EDCR_TOL) -> None:
    failing = edcr_violations(bid, tol)
    if failing:
        raise EdcrError(f"bid violates the EDCR condition at k={failing}", failing)


def project_to_edcr(bid: SegmentedBid) -> SegmentedBid:
    """EDCR bid with the same breakpoints, efficiency and up costs.

    Down costs are rebuilt from ``a^d_1`` as
    ``a^d_k = a^d_1 + eta * sum_{j<k} (a^u_j - a^u_{j+1})``. This is a simple
    anchor-and-rebuild rule, not a best-fit approximation.
    """
    issues = validate(bid)
    if issues:
        raise BidError("cannot project an invalid bid: " + "; ".join(issues))
    au = np.asarray(bid.up_costs)
    steps = np.concatenate([[0.0], np.cumsum(au[:-1] - au[1:])])
    ad = bid.down_costs[0] + bid.efficiency * steps
    out = SegmentedBid(bid.breakpoints, bid.up_costs, tuple(ad), bid.efficiency)
    assert not validate(out), validate(out)
    return out


def flat_equivalent(bid: SegmentedBid) -> SegmentedBid:
    """Width-weighted average costs as a single-segment bid."""
    w = bid.widths / bid.widths.sum()
    return SegmentedBid.flat(
        bid.soc_min, bid.soc_max,
        float(np.dot(w, bid.up_costs)), float(np.dot(w, bid.down_costs)),
        bid.efficiency,
    )


def flat_envelope(bid: SegmentedBid) -> SegmentedBid:
    """Single-segment bid at the highest up and down costs of ``bid``.

    This is the cheapest SoC-independent bid that never prices a unit of
    capacity below its cost in any segment.
    """
    return SegmentedBid.flat(bid.soc_min, bid.soc_max, max(bid.up_costs),
                             max(bid.down_costs), bid.efficiency)


def make_bid(breakpoints: Sequence[float], up_costs: Sequence[float],
             down_costs: Sequence[float], efficiency: float = 1.0) -> SegmentedBid:
    """Construct and validate in one step; raises :class:`BidError` on violations."""
    bid = SegmentedBid(tuple(breakpoints), tuple(up_costs), tuple(down_costs), efficiency)
    issues = validate(bid)
    if issues:
        raise BidError("; ".join(issues))
    return bid
