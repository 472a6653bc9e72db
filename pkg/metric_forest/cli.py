"""
Command-line entry point.

Global flags come before the subcommand:

    metric-forest [--log-level L] [--json-logs] [--log-file F]
                  [--threads N] [--assert] [--seed S] <command> ...

Machine output goes to standard output (or the given paths); logs and error
messages go to standard error. Exit codes: 0 success, 1 usage error,
2 data error, 3 internal invariant violation.
"""

import argparse
import logging
from typing import List, Optional

from dotenv import load_dotenv

from metric_forest.commands import datasets, density, diagrams, metric, neighbors, skeleton, spanning_tree
from metric_forest.config import settings
from metric_forest.error_handlers import UsageError, handle_error
from metric_forest.exceptions import EXIT_OK, EXIT_USAGE
from metric_forest.logging_config import LogContext, setup_logging

logger = logging.getLogger(__name__)

COMMAND_MODULES = (metric, neighbors, spanning_tree, diagrams, density, skeleton, datasets)
OVERRIDABLE = ("threads", "assert_mode", "seed", "log_level", "log_file", "json_logs")


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog="metric-forest",
        description="Cover trees, k-NN, MSTs, mergegrams, KDE and skeletons of finite metric spaces",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    parser.add_argument("--json-logs", action="store_true", default=None)
    parser.add_argument("--log-file")
    parser.add_argument("--threads", type=int, help="worker cap for batch queries")
    parser.add_argument("--assert", dest="assert_mode", action="store_true", default=None,
                        help="run the instrumented invariant checks")
    parser.add_argument("--seed", type=int, help="default seed (overrides METRIC_FOREST_SEED)")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for module in COMMAND_MODULES:
        module.register(subparsers)
    return parser


def _apply_overrides(args: argparse.Namespace) -> None:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        settings.threads = args.threads
    if args.assert_mode:
        settings.assert_mode = True
    if args.seed is not None:
        settings.seed = args.seed
    if args.log_level is not None:
        settings.log_level = args.log_level
    if args.log_file is not None:
        settings.log_file = args.log_file
    if args.json_logs:
        settings.json_logs = True


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one command and return its exit code"""
    load_dotenv()
    saved = {name: getattr(settings, name) for name in OVERRIDABLE}
    try:
        try:
            args = build_parser().parse_args(argv)
            _apply_overrides(args)
        except SystemExit as exc:
            # --help and --version
            return EXIT_OK if not exc.code else EXIT_USAGE
        except UsageError as exc:
            setup_logging(settings.log_level, settings.log_file, settings.json_logs)
            return handle_error(exc)

        setup_logging(settings.log_level, settings.log_file, settings.json_logs)
        logger.debug(f"Running '{args.command}' (seed={settings.seed}, threads={settings.threads})")
        with LogContext(logger, command=args.command, seed=settings.seed):
            return args.handler(args)
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)


def main() -> None:
    raise SystemExit(run())
