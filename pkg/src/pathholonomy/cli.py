"""Command-line entry point: ``pathholonomy <subcommand> --config c.json``."""
from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, apply_overrides, load
from .report import emit
from .runner import HANDLERS, run_experiment

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="pathholonomy",
                                description="Holonomy experiments on path spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        sp = sub.add_parser(name, help=f"run a {name} experiment")
        sp.add_argument("--config", required=True, help="experiment JSON file")
        sp.add_argument("--out", default=None, help="output directory (default: stdout only)")
        sp.add_argument("--format", choices=("json", "csv", "both"), default="json")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--steps-s", type=int, default=None, help="single grid level, s steps")
        sp.add_argument("--steps-t", type=int, default=None, help="single grid level, t steps")
        sp.add_argument("--seed", type=int, default=None, help="seed for auxiliary random objects")
        sp.add_argument("--richardson", action="store_true",
                        help="extrapolate values from the grid and its half")
        sp.add_argument("--timing", action="store_true", help="include wall-clock time")
        if name == "variation":
            sp.add_argument("--kind", choices=("connection", "aut", "cylinder", "symmetry",
                                               "surface-law"), default=None)
        if name == "curvature":
            sp.add_argument("--tangent-seed", type=int, default=None)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load(args.config)
        if cfg["experiment"] != args.command:
            raise ConfigError(f"config is a {cfg['experiment']!r} experiment, "
                              f"not {args.command!r}")
        opts = dict(cfg.get("options", {}))
        if getattr(args, "kind", None):
            opts["kind"] = args.kind
        if args.richardson:
            opts["richardson"] = True
        if getattr(args, "tangent_seed", None) is not None:
            opts["tangent_seed"] = args.tangent_seed
        if opts:
            cfg["options"] = opts
        cfg = apply_overrides(cfg, args.steps_s, args.steps_t, args.seed)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg, args.workers)
    except (ValueError, ArithmeticError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.out:
        try:
            for path in emit(report, args.out, args.format, args.timing):
                print(path, file=sys.stderr)
        except OSError as exc:
            print(f"output error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_json(args.timing))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} = {c.value!r} "
              f"({c.comparison} {c.tolerance}{'' if c.upper is None else f', {c.upper}'})",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
