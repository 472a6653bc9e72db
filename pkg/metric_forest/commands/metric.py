"""
Metric commands - ``stats`` and ``verify``.
"""

import logging

from metric_forest.commands import add_input_arguments, load_input
from metric_forest.error_handlers import with_error_handling
from metric_forest.io import write_json
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.metric_service import MetricService

logger = logging.getLogger(__name__)


@with_error_handling
def stats_command(args) -> int:
    """JSON {n, d_min, diameter, aspect_ratio, expansion_constant}"""
    with PerformanceLogger(logger, "Metric stats") as timer:
        space = load_input(args)
        timer.note(n=space.n)
        write_json(MetricService().stats(space).model_dump(), args.out)
    return 0


@with_error_handling
def verify_command(args) -> int:
    """JSON report of the metric axioms and cover tree invariants; exit 2 on a violated axiom"""
    with PerformanceLogger(logger, "Metric verification") as timer:
        space = load_input(args, validate=False)
        timer.note(n=space.n)
        report = MetricService().verify(space, insertion_seed=args.insertion_seed)
        write_json(report, args.out)
    return 0


def register(subparsers) -> None:
    stats = subparsers.add_parser("stats", help="size, scale and expansion statistics of a space")
    add_input_arguments(stats)
    stats.add_argument("--out", help="output JSON path (default: standard output)")
    stats.set_defaults(handler=stats_command)

    verify = subparsers.add_parser("verify", help="check metric axioms and cover tree invariants")
    add_input_arguments(verify)
    verify.add_argument("--out", help="output JSON path (default: standard output)")
    verify.set_defaults(handler=verify_command)
