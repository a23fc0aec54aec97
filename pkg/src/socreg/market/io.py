"""CSV output for clearing results and settlements."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from .problem import ClearingResult
from .settlement import SettlementReport

RESULT_COLUMNS = ["entity", "name", "t", "g_e", "g_u", "g_d", "r_u", "r_d", "soc",
                  "price_up", "price_down"]
SETTLEMENT_COLUMNS = ["name", "payment", "bid_in_cost", "bid_in_profit", "true_cost",
                      "true_profit", "cost_model", "system_cost", "status"]


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return value


def write_rows(path: str | Path, columns: list[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in columns})
    return path


def write_result_csv(result: ClearingResult, path: str | Path) -> Path:
    rows = [{k: (float(v) if hasattr(v, "dtype") else v) for k, v in row.items()}
            for row in result.rows()]
    return write_rows(path, RESULT_COLUMNS, rows)


def write_settlement_csv(report: SettlementReport, path: str | Path) -> Path:
    return write_rows(path, SETTLEMENT_COLUMNS, report.rows())
