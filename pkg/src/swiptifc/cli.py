"""Command-line front end: frontier sweeps and analytic audits."""

from __future__ import annotations

import argparse
import sys

from .audits import run_audits
from .config import ConfigError, SystemConfig, load_config
from .sweep import emit_csv, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptifc",
        description="Rate-energy tradeoff frontiers for simultaneous "
                    "information and power transfer in a K-user MIMO "
                    "interference channel.")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file; flags below override it")
    parser.add_argument("--scheme", choices=("MEB", "MLB", "SLER", "SLER_TILT"))
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--select", action="store_true", default=None,
                        help="select the harvesting pairs by ratio score")
    parser.add_argument("--audit", action="store_true",
                        help="run the analytic audit battery and exit")
    parser.add_argument("--out", metavar="PATH", default="re_curves.csv",
                        help="CSV output path (default: %(default)s)")
    parser.add_argument("--parallelism", type=int,
                        help="number of worker processes for trials")
    return parser


def resolve_config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    overrides = {}
    if args.scheme is not None:
        overrides["scheme"] = args.scheme
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.select is not None:
        overrides["select_eh"] = args.select
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    return cfg.replace(**overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.audit:
        reports = run_audits(cfg)
        for report in reports:
            print(report.line())
        return 0 if all(r.passed for r in reports) else 1

    curves = run_sweep(cfg)
    emit_csv(curves, args.out)
    print(f"config fingerprint: {cfg.fingerprint()}")
    for curve in curves:
        print(f"{curve.scheme}: {curve.fractions.size} grid points over "
              f"{curve.trials} trials -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
