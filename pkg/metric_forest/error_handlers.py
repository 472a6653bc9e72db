"""
Centralized error handling for the command-line surface.

Maps every exception to a process exit code and reports it consistently:
a structured log record plus a one-line human message on standard error.
"""

import functools
import logging
import sys
from typing import Callable

from metric_forest.exceptions import EXIT_INTERNAL, EXIT_USAGE, MetricForestError

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Raised by the argument parser instead of exiting the process"""


def metric_forest_error_handler(exc: MetricForestError) -> int:
    """Handle library exceptions"""
    logger.error(
        f"{type(exc).__name__}: {exc.error_code} - {exc.message}",
        extra={
            "error_code": exc.error_code,
            "exit_code": exc.exit_code,
            "details": exc.details,
        },
    )
    print(f"error: {exc.message}", file=sys.stderr)
    return exc.exit_code


def usage_error_handler(exc: UsageError) -> int:
    """Handle command-line usage errors"""
    logger.warning(f"Usage error: {exc}")
    print(f"usage error: {exc}", file=sys.stderr)
    return EXIT_USAGE


def generic_exception_handler(exc: Exception) -> int:
    """Handle all other unexpected exceptions"""
    logger.error(
        f"Unhandled exception: {exc}",
        exc_info=True,
        extra={"exception_type": type(exc).__name__},
    )
    print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_INTERNAL


def handle_error(exc: BaseException) -> int:
    """Dispatch an exception to its handler and return the exit code"""
    if isinstance(exc, MetricForestError):
        return metric_forest_error_handler(exc)
    if isinstance(exc, UsageError):
        return usage_error_handler(exc)
    return generic_exception_handler(exc)


def with_error_handling(func: Callable[..., int]) -> Callable[..., int]:
    """
    Decorator for command handlers.

    The wrapped handler returns its own exit code on success; any exception is
    converted to the matching exit code.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            result = func(*args, **kwargs)
            return 0 if result is None else result
        except Exception as exc:
            return handle_error(exc)

    return wrapper
