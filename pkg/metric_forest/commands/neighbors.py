"""
Neighbor command - ``knn``.
"""

import logging

from metric_forest.commands import add_input_arguments, add_query_arguments, load_input, load_queries
from metric_forest.error_handlers import with_error_handling
from metric_forest.io import write_rows
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.neighbor_service import NeighborService

logger = logging.getLogger(__name__)


@with_error_handling
def knn_command(args) -> int:
    """CSV rows (query-index, rank, ref-index, distance)"""
    with PerformanceLogger(logger, "k-NN search") as timer:
        reference = load_input(args)
        timer.note(n=reference.n)
        queries = load_queries(args, reference)
        rows = NeighborService().knn(
            reference, queries, args.k, epsilon=args.epsilon, insertion_seed=args.insertion_seed
        )
        write_rows(rows, args.out)
    return 0


def register(subparsers) -> None:
    knn = subparsers.add_parser("knn", help="k nearest neighbors through a compressed cover tree")
    add_input_arguments(knn, point_flag="--ref")
    add_query_arguments(knn)
    knn.add_argument("--k", type=int, required=True, help="neighbors per query")
    knn.add_argument("--epsilon", type=float, help="(1+epsilon)-approximate search")
    knn.add_argument("--out", help="output CSV path (default: standard output)")
    knn.set_defaults(handler=knn_command)
