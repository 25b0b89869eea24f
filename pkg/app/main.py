"""Ichnaea command-line entry point."""

import argparse
import logging
import sys

from app.cli.commands import COMMANDS, EXIT_ERROR
from app.config import apply_overrides, get_settings
from app.models import RunConfig

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging(level: str) -> None:
    """Send all app loggers to stderr at ``level``."""
    logging.basicConfig(
        level=_LOG_LEVELS.get(level.lower(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ichnaea",
        description="Energy-aware multi-robot exploration planner and simulator",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output-dir", default="out", help="Where output files go")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key, e.g. solver.time_limit_s=5 (repeatable)",
    )
    common.add_argument("--json", dest="json_output", action="store_true",
                        help="Print machine-readable JSON on stdout")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", parents=[common], help="Solve one window from the initial state")
    p.add_argument("scenario")

    p = sub.add_parser("mission", parents=[common], help="Run a full receding-horizon mission")
    p.add_argument("scenario")
    p.add_argument("--truth", help="Ground-truth file (default: generated)")

    p = sub.add_parser("compare", parents=[common], help="Planned mission vs always-on baseline")
    p.add_argument("scenario")
    p.add_argument("--truth", help="Ground-truth file (default: generated)")
    p.add_argument("--seeds", type=int, default=1, help="Number of seeds to sweep")
    p.add_argument("--jobs", type=int, default=1, help="Parallel worker processes")

    p = sub.add_parser("profile", parents=[common], help="Fit device profiles, write the table")
    p.add_argument("--anchors", help="Anchor points file (default: built-in)")

    p = sub.add_parser("dump-model", parents=[common], help="Write the first window as LP")
    p.add_argument("scenario")
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        subcommand=args.subcommand,
        scenario_path=getattr(args, "scenario", None),
        output_dir=args.output_dir,
        overrides=args.overrides,
        json_output=args.json_output,
        seeds=getattr(args, "seeds", 1),
        jobs=getattr(args, "jobs", 1),
        truth_path=getattr(args, "truth", None),
        anchors_path=getattr(args, "anchors", None),
    )


def main(argv: list[str] | None = None) -> int:
    """Run one subcommand. Returns 0 on success, 2 on a solver time limit, 1 on error."""
    try:
        config = parse_config(argv)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    try:
        # Only the log level is needed this early; commands apply the rest.
        log_overrides = [
            o for o in config.overrides if o.partition("=")[0].strip() == "ichnaea_log"
        ]
        configure_logging(apply_overrides(get_settings(), None, log_overrides).ichnaea_log)
        return COMMANDS[config.subcommand](config)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
