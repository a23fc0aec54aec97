"""Regulation market clearing: convex LP for EDCR bids, segment MIP otherwise."""

from .convex import clear_convex
from .io import write_result_csv, write_settlement_csv
from .mip import clear_mip, default_big_m
from .problem import ClearingProblem, ClearingResult, GeneratorAsset, NetworkModel
from .settlement import (
    SettlementReport,
    StorageSettlement,
    UnidirectionalCheck,
    check_unidirectional_condition,
    is_unidirectional,
    settle,
    storage_cost,
)

__all__ = [
    "ClearingProblem",
    "ClearingResult",
    "GeneratorAsset",
    "NetworkModel",
    "SettlementReport",
    "StorageSettlement",
    "UnidirectionalCheck",
    "check_unidirectional_condition",
    "clear_convex",
    "clear_mip",
    "default_big_m",
    "is_unidirectional",
    "settle",
    "storage_cost",
    "write_result_csv",
    "write_settlement_csv",
]
