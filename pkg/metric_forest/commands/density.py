"""
Density command - ``kde``.
"""

import logging

from metric_forest.commands import add_input_arguments, add_query_arguments, load_input, load_queries
from metric_forest.error_handlers import with_error_handling
from metric_forest.io import write_json, write_rows
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.density_service import DensityService

logger = logging.getLogger(__name__)


@with_error_handling
def kde_command(args) -> int:
    """CSV rows (query-index, f)"""
    with PerformanceLogger(logger, "Kernel density") as timer:
        reference = load_input(args)
        timer.note(n=reference.n)
        queries = load_queries(args, reference)
        rows, summary = DensityService().kde(
            reference, queries, args.r, args.t, epsilon=args.epsilon, insertion_seed=args.insertion_seed
        )
        write_rows(rows, args.out)
        if args.summary_out:
            write_json(summary.model_dump(), args.summary_out)
    return 0


def register(subparsers) -> None:
    kde = subparsers.add_parser("kde", help="sigmoid kernel density of query points")
    add_input_arguments(kde, point_flag="--ref")
    add_query_arguments(kde)
    kde.add_argument("--r", type=float, required=True, help="kernel midpoint")
    kde.add_argument("--t", type=float, required=True, help="width of the 0.99 to 0.01 drop")
    kde.add_argument("--epsilon", type=float, help="per-point error bound of the tree approximation")
    kde.add_argument("--out", help="output CSV path (default: standard output)")
    kde.add_argument("--summary-out", help="run summary JSON path")
    kde.set_defaults(handler=kde_command)
