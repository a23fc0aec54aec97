"""Export to the CPLEX LP text format (debugging aid)."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable

from .model import LinearProgram

_UNSAFE = re.compile(r"[^A-Za-z0-9_.]")


def _name(raw: str) -> str:
    name = _UNSAFE.sub("_", raw)
    return name if not name[:1].isdigit() else "_" + name


def _terms(coeffs: Iterable[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for j, a in coeffs:
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {abs(a):.12g} {names[j]}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(lp: LinearProgram, binaries: Iterable[int] = ()) -> str:
    cols = [_name(n) for n in lp.col_names]
    sense_map = {"<=": "<=", ">=": ">=", "=": "="}
    lines = [f"\\ {lp.name}", "Minimize"]
    obj = [(j, a) for j, a in enumerate(lp.cost)]
    lines.append(" obj: " + _terms(obj, cols))
    lines.append("Subject To")
    for i, rname in enumerate(lp.row_names):
        coeffs = sorted(lp.row_coeffs(i).items())
        lines.append(f" {_name(rname)}: {_terms(coeffs, cols)} {sense_map[lp.senses[i]]} {lp.rhs[i]:.12g}")
    lines.append("Bounds")
    for j, name in enumerate(cols):
        lo, hi = lp.lb[j], lp.ub[j]
        if lo == float("-inf") and hi == float("inf"):
            lines.append(f" {name} free")
        elif lo == hi:
            lines.append(f" {name} = {lo:.12g}")
        else:
            lo_txt = "-inf" if lo == float("-inf") else f"{lo:.12g}"
            hi_txt = "+inf" if hi == float("inf") else f"{hi:.12g}"
            lines.append(f" {lo_txt} <= {name} <= {hi_txt}")
    binaries = list(binaries)
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {cols[j]}" for j in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp: LinearProgram, path: str | Path, binaries: Iterable[int] = ()) -> Path:
    path = Path(path)
    path.write_text(to_lp_text(lp, binaries))
    return path
