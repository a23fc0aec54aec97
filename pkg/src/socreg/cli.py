"""Command-line entry point: ``socreg {validate,clear,study}``.

Exit codes are a stable contract: 0 success, 1 I/O or configuration
error, 2 bid validation failure, 3 solver failure.

Solver settings come from the config file's ``solver`` section, then
``SOCREG_<FIELD>`` environment variables (``SOCREG_FEAS_TOL``,
``SOCREG_NODE_LIMIT``, ``SOCREG_METHOD``, ...), then command-line flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .bids import edcr_violations, validate
from .config import LoadedConfig, default_config_path, load_config
from .errors import BidError, ConfigError, InstanceTooLarge, SocRangeError, SolverError
from .lp.lpformat import write_lp
from .market import (
    check_unidirectional_condition,
    clear_convex,
    clear_mip,
    is_unidirectional,
    settle,
    write_result_csv,
    write_settlement_csv,
)
from .market.io import write_rows
from .sim.harness import (
    LONG_COLUMNS,
    MODES,
    RECORD_COLUMNS,
    SUMMARY_METRICS,
    VARIANTS,
    run_study,
    with_overrides,
)
from .sim.scenarios import gen_scenarios

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

SUMMARY_COLUMNS = ["mode", "shift", "variant", "n", *SUMMARY_METRICS]

log = logging.getLogger("socreg")


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config: str
    out: str | None
    seed: int
    solver: dict
    version: str = __version__

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


# -- helpers ----------------------------------------------------------------------


def _load(args) -> LoadedConfig:
    loaded = load_config(args.config)
    study = loaded.study
    solver = study.solver
    if getattr(args, "node_limit", None) is not None:
        solver = replace(solver, node_limit=args.node_limit)
    if getattr(args, "gap_tol", None) is not None:
        solver = replace(solver, gap_tol=args.gap_tol)
    study = with_overrides(
        study, seed=args.seed, solver=solver,
        scenarios=getattr(args, "scenarios", None),
        workers=getattr(args, "workers", None),
        modes=(args.mode,) if getattr(args, "mode", None) else None,
    )
    issues = study.validate()
    if issues:
        raise ConfigError("study: " + "; ".join(issues))
    return replace(loaded, study=study)


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    return out


def _manifest(args, loaded: LoadedConfig, out: Path | None) -> RunManifest:
    return RunManifest(args.command, str(args.config), None if out is None else str(out),
                       loaded.study.seed, asdict(loaded.study.solver))


# -- subcommands ------------------------------------------------------------------------


def cmd_validate(args) -> int:
    loaded = _load(args)
    failed = False
    for variant, bid in sorted(loaded.template.bids.items()):
        issues = validate(bid)
        failing = [] if issues else edcr_violations(bid)
        edcr = "yes" if not failing else f"no (k={failing})"
        print(f"{variant:5s} K={bid.n_segments} valid={'yes' if not issues else 'no'} "
              f"edcr={edcr}")
        for issue in issues:
            print(f"      {issue}")
        must_be_edcr = args.strict or variant != "true"
        if issues or (failing and must_be_edcr):
            failed = True
    if failed:
        print("validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{args.config}: ok")
    return EXIT_OK


def cmd_clear(args) -> int:
    loaded = _load(args)
    cfg, template = loaded.study, loaded.template
    out = _out_dir(args.out)
    method = args.method or ("mip" if args.variant == "true" else "lp")
    shift = cfg.shifts[0] if args.shift is None else args.shift
    scenario = gen_scenarios(args.scenario + 1, cfg.mu[:cfg.horizon], cfg.sigma, cfg.seed,
                             cfg.curve)[args.scenario]
    problem = template.problem(scenario.wind, shift, args.variant, cfg)
    started = time.perf_counter()
    if method == "lp":
        result = clear_convex(problem, cfg.solver)
    else:
        result = clear_mip(problem, cfg.solver, cfg.big_m)
    elapsed = time.perf_counter() - started
    report = settle(result, [template.storage.bid])
    write_result_csv(result, out / "result.csv")
    write_settlement_csv(report, out / "settlement.csv")
    if args.export_lp:
        binaries = result.meta.get("binaries", ())
        write_lp(result.meta["lp"], out / "model.lp", binaries)
    summary = {
        "method": result.method, "variant": args.variant, "status": result.status,
        "objective": result.objective, "gap": result.gap, "nodes": result.nodes,
        "seconds": round(elapsed, 3), "scenario": args.scenario, "shift": shift,
        "unidirectional": is_unidirectional(result),
        "condition_violations": sum(c.violated for c in check_unidirectional_condition(result))
        if result.method == "lp" else 0,
        "storage_true_profit": report.total_true_profit,
    }
    if result.method == "mip":
        summary["big_m"] = result.meta["big_m"]
    if args.check_mip and result.method == "lp":
        mip = clear_mip(problem, cfg.solver, cfg.big_m, warm_start=result)
        summary["mip_objective"] = mip.objective
        summary["mip_status"] = mip.status
        summary["lp_mip_rel_gap"] = abs(mip.objective - result.objective) / (
            1.0 + abs(result.objective))
    (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _manifest(args, loaded, out).write(out)
    print(f"{result.method} {result.status}: objective {result.objective:.6f} "
          f"gap {result.gap:.3g} ({elapsed:.2f} s) -> {out}")
    return EXIT_OK


def cmd_study(args) -> int:
    loaded = _load(args)
    cfg = loaded.study
    if args.variant:
        cfg = replace(cfg, variants=tuple(args.variant))
    out = _out_dir(args.out)
    started = time.perf_counter()
    study = run_study(loaded.template, cfg)
    elapsed = time.perf_counter() - started
    write_rows(out / "scenarios.csv", RECORD_COLUMNS, study.records)
    write_rows(out / "summary.csv", SUMMARY_COLUMNS, study.summary)
    write_rows(out / "long.csv", LONG_COLUMNS, study.long)
    _manifest(args, loaded, out).write(out)
    for row in study.summary:
        if "profit_gain_pct" in row:
            print(f"{row['mode']:8s} shift {row['shift']:g}: profit {row['profit_gain_pct']:+.3f}% "
                  f"cost {row['cost_change_pct']:+.3f}%")
    print(f"{cfg.scenarios} scenarios in {elapsed:.1f} s -> {out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=str(default_config_path()),
                        help="YAML case file (default: the shipped case)")
    common.add_argument("--seed", type=int, default=None, help="override the study seed")
    common.add_argument("--node-limit", type=int, default=None, help="branch-and-bound node limit")
    common.add_argument("--gap-tol", type=float, default=None, help="relative MIP gap tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="socreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check every bid in a config")
    p.add_argument("--strict", action="store_true",
                   help="also require the true bid to satisfy EDCR")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("clear", parents=[common], help="clear one scenario and write CSVs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--method", choices=("lp", "mip"), default=None,
                   help="lp (EDCR bids only) or mip; default lp, or mip for --variant true")
    p.add_argument("--variant", choices=VARIANTS, default="edcr")
    p.add_argument("--scenario", type=int, default=0, help="wind scenario index")
    p.add_argument("--shift", type=float, default=None,
                   help="regulation demand shift in MWh (default: first configured shift)")
    p.add_argument("--export-lp", action="store_true", help="also write model.lp")
    p.add_argument("--check-mip", action="store_true",
                   help="after an lp clearing, re-clear with the MIP and report the gap")
    p.set_defaults(func=cmd_clear)

    p = sub.add_parser("study", parents=[common], help="run the scenario study")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scenarios", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default=None, help="restrict to one dispatch mode")
    p.add_argument("--variant", choices=VARIANTS, action="append", default=None,
                   help="bid variant to run; repeat for several (default: from config)")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BidError, SocRangeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, InstanceTooLarge) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
