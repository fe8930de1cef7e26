"""Command-line interface.

``popcheck <dp|regression|lda|custom> --out DIR [--config FILE] [--seed N]
[--replications R] [--threads T]`` runs one experiment and writes its CSV
report, a rendered figure (JSON result and trace for ``custom``), and is
byte-deterministic given the configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    cmd_custom,
    cmd_dp,
    cmd_lda,
    cmd_regression,
)

_RUNNERS = {
    "dp": cmd_dp,
    "regression": cmd_regression,
    "lda": cmd_lda,
    "custom": cmd_custom,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popcheck",
        description="Population and posterior predictive checks for Bayesian models.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, help_text in (
        ("dp", "predictive p-values for the Dirichlet-process example"),
        ("regression", "check sweep for Bayesian linear regression"),
        ("lda", "IMI deviance sweep for topic models"),
        ("custom", "run a check described by a JSON config"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (required for custom)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--replications", type=int, help="replication count override")
        p.add_argument("--threads", type=int, help="worker threads for sweep points")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        user = _load_config(args.config) if args.config else {}
        if args.experiment == "custom" and not args.config:
            raise ConfigError("the custom command requires --config")
        config = ExperimentConfig.build(
            args.experiment,
            user,
            seed=args.seed,
            replications=args.replications,
            threads=args.threads,
        )
        paths = _RUNNERS[args.experiment](config, args.out)
    except ConfigError as exc:
        print(f"popcheck: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and fail nonzero
        print(f"popcheck: error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
