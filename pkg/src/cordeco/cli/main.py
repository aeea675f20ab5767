"""Command-line entry point: ``cordeco run|validate|list-scenarios``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import SCENARIOS, ConfigError, parse_config
from .scenarios import EXIT_ERROR, EXIT_OK, OUTPUT_DIR_ENV, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cordeco",
        description="Master equations for qubits in spatially correlated environments.",
        epilog=f"Outputs are written to ${OUTPUT_DIR_ENV} (default: current directory).")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario config")
    run.add_argument("path", help="YAML scenario file")
    run.add_argument("-j", "--workers", type=int, default=1,
                     help="worker threads for sweeps inside a scenario (default 1)")
    val = sub.add_parser("validate", help="check a scenario config without running it")
    val.add_argument("path", help="YAML scenario file")
    sub.add_parser("list-scenarios", help="print the available scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-scenarios":
        for name, doc in SCENARIOS.items():
            print(f"{name:18s} {doc}")
        return EXIT_OK
    try:
        cfg = parse_config(args.path)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for w in cfg.warnings:
        print(f"warning {w.code}: {w.message}", file=sys.stderr)
    if args.command == "validate":
        print(f"ok: {cfg.scenario} config {cfg.digest}")
        return EXIT_OK
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        report = run_scenario(cfg, workers=args.workers)
    except Exception as exc:  # noqa: BLE001 - surfaced to the user with context
        print(f"error: scenario {cfg.scenario} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for w in report.warnings[len(cfg.warnings):]:
        print(f"warning {w.code}: {w.message}", file=sys.stderr)
    for f in report.files:
        print(f)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
