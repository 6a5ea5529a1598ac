import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from config.experiment import PRESETS, ExperimentConfig, load_experiment, parse_overrides, to_flat_text
from config.settings import Settings, load_settings
from smoosh.analysis.constants import bound_report
from smoosh.core.base import LabResponse
from smoosh.core.errors import ParameterError
from smoosh.runner.acceptance import DEFAULT_SEED, verify
from smoosh.runner.experiments import couple_experiment, mixing_curve, run
from ui import display_manager as ui

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _experiment_parser(sub, name: str, help_text: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--preset", choices=sorted(PRESETS), help="Start from a named parameter set.")
    p.add_argument("--config", type=Path, help="Flat 'key = value' config file.")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="Override one config field (repeatable).")
    p.add_argument("--seed", type=int, help="64-bit master seed.")
    p.add_argument("--replicas", type=int, help="Number of replicas.")
    p.add_argument("--out", type=Path, help="Output directory (default: $SMOOSH_OUT_DIR or ./runs).")
    p.add_argument("--workers", type=int, help="Worker processes (default: physical cores).")
    p.add_argument("--print-config", action="store_true", help="Print the resolved config and exit.")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smooshlab", description="Gather-and-spread shuffling lab")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="Print the closed-form bound report as JSON.")
    c.add_argument("--delta", type=float, default=0.3)
    c.add_argument("--p", type=float, default=0.5)
    c.add_argument("--sigma2", type=float, default=0.5)
    c.add_argument("--m", type=int, default=52)
    c.add_argument("--c1", type=float, default=0.0)
    c.add_argument("--alpha", type=float)
    c.add_argument("--table-side", type=float, default=1.0)

    _experiment_parser(sub, "simulate", "Run replicas and write artifacts.")
    _experiment_parser(sub, "couple", "Run the shadow coupling and write stage times.")
    mc = _experiment_parser(sub, "mixing-curve", "Estimate TV to uniform and P(tau > t) on a time grid.")
    mc.add_argument("--t-grid", help="Comma-separated times (overrides t_grid).")

    v = sub.add_parser("verify", help="Run the acceptance criteria.")
    v.add_argument("--fast", action="store_true", help="Only the quick subset.")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--only", action="append", help="Run only this criterion (repeatable).")
    v.add_argument("--out", type=Path, help="Write verify_report.csv/json here.")
    v.add_argument("--workers", type=int)
    return ap


def _settings(args) -> Settings:
    settings = load_settings()
    if getattr(args, "workers", None):
        settings.pool.workers = max(1, args.workers)
    return settings


def _resolve_config(args) -> ExperimentConfig:
    overrides: Dict[str, Any] = parse_overrides(args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replicas is not None:
        overrides["replicas"] = args.replicas
    if getattr(args, "t_grid", None):
        overrides["t_grid"] = args.t_grid
    return load_experiment(preset=args.preset, config_file=args.config, overrides=overrides)


def _report_run(response: LabResponse) -> int:
    if response.data is None:
        ui.error(response.error or "run failed")
        return EXIT_USAGE
    manifest = response.data["manifest"]
    ui.mapping("Run", {"run_id": manifest.run_id, "status": manifest.status, "replicas": manifest.replicas,
                       "wall_clock_s": manifest.wall_clock_s, "directory": response.data["run_dir"]})
    ui.artifacts(manifest.artifacts)
    if manifest.failures:
        ui.warn(f"{len(manifest.failures)} replicas failed; see manifest.json")
        return EXIT_FAILED
    ui.success("done")
    return EXIT_OK


def _cmd_constants(args) -> int:
    report = bound_report(args.delta, args.p, args.sigma2, m=args.m, c1=args.c1, alpha=args.alpha,
                          table_side=args.table_side)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = _resolve_config(args)
    settings = _settings(args)
    if args.print_config:
        sys.stdout.write(to_flat_text(config.with_numerics(settings.numerics)))
        return EXIT_OK
    out = args.out
    ui.info(f"{args.command}: {config.model}, {config.replicas} replicas, seed {config.seed}")
    if args.command == "simulate":
        response = run(config, settings=settings, out_dir=out)
    elif args.command == "couple":
        response = couple_experiment(config, settings=settings, out_dir=out)
    else:
        response = mixing_curve(config, settings=settings, out_dir=out)
    return _report_run(response)


def _cmd_verify(args) -> int:
    ui.banner("smooshlab verify", f"{'fast' if args.fast else 'full'} suite, seed {args.seed}")
    response = verify(fast=args.fast, settings=_settings(args), out_dir=args.out, seed=args.seed, only=args.only)
    ui.criteria(response.data["rows"])
    print(json.dumps([{k: r[k] for k in ("criterion", "passed", "runtime_s", "replicas")}
                      for r in response.data["rows"]], indent=2))
    if not response.success:
        ui.error(response.error)
        return EXIT_FAILED
    ui.success("all criteria passed")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    smooshlab console entrypoint.

    Exit status: 0 on success, 1 when replicas or criteria failed, 2 on an
    invalid configuration.
    """
    args = build_parser().parse_args(argv)
    try:
        if args.command == "constants":
            return _cmd_constants(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_experiment(args)
    except (ValidationError, ParameterError, OSError) as e:
        ui.error(f"Invalid configuration: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
