"""Command-line entry point ``dipole-flux``."""

from __future__ import annotations

import argparse
import sys

from .scenario import ConfigError, emit, load_config, run_scenario

SUBCOMMANDS = {
    "run": None,
    "rates": ["rates"],
    "flux": ["real-flux"],
    "virtual": ["virtual-flux"],
    "map": ["angular-map"],
    "classical": ["classical-field"],
    "check": ["identities"],
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dipole-flux", description="Dipole radiation flux pipelines.")
    p.add_argument("task", choices=list(SUBCOMMANDS),
                   help="task to run; 'run' executes the tasks listed in the config")
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, SUBCOMMANDS[args.task])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bundle = run_scenario(cfg)
    try:
        files = emit(bundle, args.format, args.out)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for f in files:
        print(f)
    for task, msg in bundle.errors.items():
        print(f"{task}: numerical failure: {msg}", file=sys.stderr)
    return EXIT_NUMERICAL if bundle.errors else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
