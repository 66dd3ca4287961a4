"""Command-line runner: parse a config, run the experiment, write reports.

Exit codes: 0 success, 1 invalid configuration or usage, 2 internal
numerical failure, 3 a check flag failed while --check was requested.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    NumericalError,
    load_config,
    run_experiment,
    write_outputs,
)

_MAX_SEED = 2**64


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration mistakes for exit-code purposes
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not (0 <= value < _MAX_SEED):
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _reps(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("reps must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="randop",
        description="Replicated experiments on random shifted-Gaussian operators.",
    )
    parser.add_argument("experiment", choices=list(EXPERIMENTS), help="experiment to run")
    parser.add_argument("--config", required=True, help="path to a JSON config document")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--seed", type=_seed, default=None, help="override master_seed")
    parser.add_argument("--reps", type=_reps, default=None, help="override replications")
    parser.add_argument(
        "--check",
        action="store_true",
        help="exit 3 if any experiment check flag fails",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config,
            experiment=args.experiment,
            seed_override=args.seed,
            reps_override=args.reps,
        )
        report = run_experiment(cfg)
        write_outputs(report, args.out)
    except ConfigError as exc:
        print(f"randop: config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"randop: numerical failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else is an internal failure, not usage
        print(f"randop: internal error: {exc}", file=sys.stderr)
        return 2

    for name in sorted(report.checks):
        status = "pass" if report.checks[name] else "FAIL"
        print(f"{report.experiment}: {name}: {status}")
    print(f"{report.experiment}: wrote report.json and {len(report.tables)} table(s) to {args.out}")
    if args.check and not report.passed:
        print(f"randop: {report.experiment} checks failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
