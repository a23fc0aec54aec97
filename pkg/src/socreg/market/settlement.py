"""Capacity payments, bid-in and true profits, and the unidirectional-clearing check."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..bids import SegmentedBid, StorageAsset, check_edcr
from ..costs import approx_cost_path, edcr_cost
from ..worstcase import aggregate_worst_cost
from .problem import ClearingResult

PRODUCT_TOL = 1e-9
#: relative margin for the strict price inequality; ties within rounding do not count
CONDITION_TOL = 1e-9


@dataclass(frozen=True)
class StorageSettlement:
    name: str
    payment: float
    bid_in_cost: float
    bid_in_profit: float
    true_cost: float
    true_profit: float
    cost_model: str  # "worst_case" for EDCR true bids, "approx" otherwise

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SettlementReport:
    storages: tuple[StorageSettlement, ...]
    system_cost: float
    status: str

    @property
    def total_true_profit(self) -> float:
        return float(sum(s.true_profit for s in self.storages))

    def rows(self) -> list[dict]:
        return [dict(s.to_dict(), system_cost=self.system_cost, status=self.status)
                for s in self.storages]


def storage_cost(storage: StorageAsset, r_up, r_down) -> tuple[float, str]:
    """Cost of cleared capacities under ``storage.bid``.

    EDCR bids use the exact worst case, summed over intervals along the
    full-utilization SoC path. Other bids fall back to the cheaper of the
    two single-pass orderings per interval, which is an approximation.
    """
    if check_edcr(storage.bid):
        return aggregate_worst_cost(storage, r_up, r_down), "worst_case"
    return approx_cost_path(storage.bid, r_up, r_down, storage.initial_soc), "approx"


def bid_in_cost(storage: StorageAsset, r_up, r_down) -> float:
    if check_edcr(storage.bid):
        return edcr_cost(storage.bid, r_up, r_down, storage.initial_soc)
    return approx_cost_path(storage.bid, r_up, r_down, storage.initial_soc)


def settle(result: ClearingResult, true_bids: Sequence[SegmentedBid] | None = None
           ) -> SettlementReport:
    """Pay cleared capacity at the requirement prices and evaluate profits.

    ``true_bids`` default to the bids that were cleared, in which case the
    true and bid-in profits coincide.
    """
    storages = result.storages
    if true_bids is None:
        true_bids = [st.bid for st in storages]
    if len(true_bids) != len(storages):
        raise ValueError(f"{len(true_bids)} true bids for {len(storages)} storages")
    out = []
    for s, (st, true_bid) in enumerate(zip(storages, true_bids)):
        r_up, r_down = result.r_u[s], result.r_d[s]
        payment = float(result.price_up @ r_up + result.price_down @ r_down)
        cleared = bid_in_cost(st, r_up, r_down)
        true_cost, model = storage_cost(st.with_bid(true_bid), r_up, r_down)
        out.append(StorageSettlement(st.name, payment, cleared, payment - cleared,
                                     true_cost, payment - true_cost, model))
    return SettlementReport(tuple(out), float(result.objective), result.status)


@dataclass(frozen=True)
class UnidirectionalCheck:
    t: int
    condition: bool       # a^u_K eta + a^d_1 > beta^u eta + beta^d
    unidirectional: bool  # r^u_t r^d_t == 0 (within PRODUCT_TOL)

    @property
    def violated(self) -> bool:
        return self.condition and not self.unidirectional


def check_unidirectional_condition(result: ClearingResult, bid: SegmentedBid | None = None,
                                   index: int = 0) -> list[UnidirectionalCheck]:
    """Per-interval test of the sufficient condition for one-directional clearing."""
    bid = bid if bid is not None else result.storages[index].bid
    eta = bid.efficiency
    lhs = bid.up_costs[-1] * eta + bid.down_costs[0]
    rhs = result.price_up * eta + result.price_down
    margin = CONDITION_TOL * max(1.0, abs(lhs))
    product = result.r_u[index] * result.r_d[index]
    return [UnidirectionalCheck(t, bool(lhs > rhs[t] + margin), bool(product[t] <= PRODUCT_TOL))
            for t in range(result.horizon)]


def is_unidirectional(result: ClearingResult, tol: float = PRODUCT_TOL) -> bool:
    return bool(np.all(result.r_u * result.r_d <= tol))
