"""YAML configuration: study settings, network, generators and the storage bids.

Layout (all sections but ``generators`` and ``storage`` are optional)::

    study:      horizon, window, scenarios, seed, reg_up_base, reg_down_base,
                shifts, modes, variants, workers
    wind:       sigma, mu, cut_in, rated_speed, cut_out, capacity, bus
    network:    demand (scalar, per-interval list, or T x M rows),
                shift_factors, limits
    generators: list of {name, energy_cost: [[width, slope], ...] or slope,
                g_max, g_min, reg_up_cost, reg_down_cost, reg_up_cap, reg_down_cap, bus}
    storage:    name, initial_soc, reg_up_cap, reg_down_cap, bus,
                true_bid: {breakpoints, up_costs, down_costs, efficiency},
                edcr_bid: "project" or an explicit bid,
                flat_bid: "envelope", "average" or an explicit bid
    solver:     any SolverOptions field, plus big_m
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .bids import (
    SegmentedBid,
    StorageAsset,
    flat_envelope,
    flat_equivalent,
    project_to_edcr,
    validate,
)
from .errors import BidError, ConfigError
from .lp import INF, SolverOptions
from .market import GeneratorAsset, NetworkModel
from .sim.harness import CaseTemplate, StudyConfig
from .sim.scenarios import DEFAULT_MU, PowerCurve

FLAT_RULES = {"envelope": flat_envelope, "average": flat_equivalent}


@dataclass(frozen=True)
class LoadedConfig:
    template: CaseTemplate
    study: StudyConfig
    source: Path | None = None


def _number(value: Any, what: str) -> float:
    if value is None:
        return INF
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", ".inf"):
        return INF
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: expected a number, got {value!r}") from None


def _section(data: dict, key: str, required: bool = False) -> dict:
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing required section {key!r}")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"section {key!r} must be a mapping")
    return value


def _bid(raw: Any, what: str) -> SegmentedBid:
    if not isinstance(raw, dict):
        raise ConfigError(f"{what}: expected a mapping with breakpoints/up_costs/down_costs")
    try:
        bid = SegmentedBid.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from None
    return bid


def _generator(raw: dict) -> GeneratorAsset:
    if "name" not in raw:
        raise ConfigError("every generator needs a name")
    name = raw["name"]
    cost = raw.get("energy_cost", 0.0)
    if isinstance(cost, (int, float)):
        pieces = ((INF, float(cost)),)
    else:
        pieces = tuple((_number(w, f"{name}.energy_cost width"),
                        _number(s, f"{name}.energy_cost slope")) for w, s in cost)
    g_max = raw.get("g_max")
    if isinstance(g_max, list):
        g_max = tuple(_number(v, f"{name}.g_max") for v in g_max)
    else:
        g_max = _number(g_max, f"{name}.g_max")
    return GeneratorAsset(
        name=name, energy_cost=pieces, g_max=g_max,
        g_min=_number(raw.get("g_min", 0.0), f"{name}.g_min"),
        reg_up_cost=_number(raw.get("reg_up_cost", 0.0), f"{name}.reg_up_cost"),
        reg_down_cost=_number(raw.get("reg_down_cost", 0.0), f"{name}.reg_down_cost"),
        reg_up_cap=_number(raw.get("reg_up_cap"), f"{name}.reg_up_cap"),
        reg_down_cap=_number(raw.get("reg_down_cap"), f"{name}.reg_down_cap"),
        bus=int(raw.get("bus", 0)),
    )


def _network(raw: dict, horizon: int) -> NetworkModel:
    demand = raw.get("demand", 0.0)
    d = np.asarray(demand, dtype=float)
    if d.ndim == 0:
        d = np.full((horizon, 1), float(d))
    elif d.ndim == 1:
        d = d.reshape(-1, 1)
    if d.shape[0] < horizon:
        raise ConfigError(f"network.demand covers {d.shape[0]} intervals, horizon is {horizon}")
    S = raw.get("shift_factors") or np.zeros((0, d.shape[1]))
    q = raw.get("limits") or []
    net = NetworkModel(np.asarray(S, dtype=float), np.asarray(q, dtype=float), d)
    issues = net.validate()
    if issues:
        raise ConfigError("network: " + "; ".join(issues))
    return net


def _storage(raw: dict) -> tuple[StorageAsset, dict[str, SegmentedBid]]:
    true_bid = _bid(raw.get("true_bid"), "storage.true_bid")
    issues = validate(true_bid)
    if issues:
        raise BidError("storage.true_bid: " + "; ".join(issues))
    edcr_raw = raw.get("edcr_bid", "project")
    if edcr_raw == "project":
        edcr = project_to_edcr(true_bid)
    else:
        edcr = _bid(edcr_raw, "storage.edcr_bid")
    flat_raw = raw.get("flat_bid", "envelope")
    if isinstance(flat_raw, str):
        if flat_raw not in FLAT_RULES:
            raise ConfigError(f"storage.flat_bid: unknown rule {flat_raw!r}; "
                              f"use one of {sorted(FLAT_RULES)} or an explicit bid")
        flat = FLAT_RULES[flat_raw](true_bid)
    else:
        flat = _bid(flat_raw, "storage.flat_bid")
    storage = StorageAsset(
        true_bid,
        _number(raw.get("initial_soc"), "storage.initial_soc"),
        _number(raw.get("reg_up_cap"), "storage.reg_up_cap"),
        _number(raw.get("reg_down_cap"), "storage.reg_down_cap"),
        str(raw.get("name", "storage")),
        int(raw.get("bus", 0)),
    )
    return storage, {"true": true_bid, "edcr": edcr, "flat": flat}


def _solver(raw: dict) -> tuple[SolverOptions, float | None]:
    raw = dict(raw)
    big_m = raw.pop("big_m", None)
    known = {f.name for f in fields(SolverOptions)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"solver: unknown options {sorted(unknown)}")
    try:
        options = SolverOptions.from_env(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None
    return options, (None if big_m is None else float(big_m))


def parse_config(data: dict, source: Path | None = None) -> LoadedConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    study_raw = _section(data, "study")
    wind_raw = _section(data, "wind")
    horizon = int(study_raw.get("horizon", 24))
    curve = PowerCurve(
        cut_in=float(wind_raw.get("cut_in", 3.0)),
        rated_speed=float(wind_raw.get("rated_speed", 12.0)),
        cut_out=float(wind_raw.get("cut_out", 25.0)),
        rated=float(wind_raw.get("capacity", 20.0)),
    )
    solver, big_m = _solver(_section(data, "solver"))
    study = StudyConfig(
        horizon=horizon,
        window=int(study_raw.get("window", 4)),
        scenarios=int(study_raw.get("scenarios", 100)),
        seed=int(study_raw.get("seed", 0)),
        reg_up_base=float(study_raw.get("reg_up_base", 25.0)),
        reg_down_base=float(study_raw.get("reg_down_base", 25.0)),
        shifts=tuple(float(v) for v in study_raw.get("shifts", (0.0, 5.0, 10.0))),
        modes=tuple(study_raw.get("modes", ("oneshot", "rolling"))),
        variants=tuple(study_raw.get("variants", ("edcr", "flat"))),
        sigma=float(wind_raw.get("sigma", 5.0)),
        mu=tuple(float(v) for v in wind_raw.get("mu", DEFAULT_MU)),
        curve=curve,
        workers=int(study_raw.get("workers", 1)),
        solver=solver,
        big_m=big_m,
    )
    issues = study.validate()
    if issues:
        raise ConfigError("study: " + "; ".join(issues))
    gens_raw = data.get("generators")
    if not isinstance(gens_raw, list) or not gens_raw:
        raise ConfigError("'generators' must be a nonempty list")
    generators = tuple(_generator(g) for g in gens_raw)
    storage, bids = _storage(_section(data, "storage", required=True))
    template = CaseTemplate(
        network=_network(_section(data, "network"), horizon),
        generators=generators,
        storage=storage,
        bids=bids,
        wind_bus=int(wind_raw.get("bus", 0)),
    )
    return LoadedConfig(template, study, source)


def load_config(path: str | Path) -> LoadedConfig:
    """Read and validate a YAML configuration; I/O and schema problems raise ConfigError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data, path)


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "shipped_case.yaml"
