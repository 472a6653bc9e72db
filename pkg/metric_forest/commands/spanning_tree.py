"""
Spanning tree commands - ``mst`` and ``bench``.
"""

import logging

from metric_forest.commands import add_input_arguments, load_input
from metric_forest.cover_tree import tree_to_dict
from metric_forest.error_handlers import with_error_handling
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.io import write_json, write_rows
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.spanning_tree_service import BENCH_SUITES, SpanningTreeService
from metric_forest.validators import validate_size_list

logger = logging.getLogger(__name__)

BENCH_HEADER = ("suite", "n", "wall_time", "rounds", "rho", "monotone")


@with_error_handling
def mst_command(args) -> int:
    """
    Edge list CSV (a, b, length) to --edges-out or standard output, and the
    summary JSON to --summary-out.
    """
    with PerformanceLogger(logger, "Minimum spanning tree") as timer:
        space = load_input(args)
        timer.note(n=space.n)
        if args.oracle and args.tree_json:
            raise InvalidArgumentError("--tree-json needs the cover tree algorithm, not --oracle", field="tree_json")
        spanning, summary, tree = SpanningTreeService().mst(
            space, oracle=args.oracle, insertion_seed=args.insertion_seed
        )
        write_rows(spanning.edges, args.edges_out)
        if args.summary_out:
            write_json(summary.model_dump(), args.summary_out)
        if args.tree_json:
            write_json(tree_to_dict(tree), args.tree_json)
    return 0


@with_error_handling
def bench_command(args) -> int:
    """CSV (suite, n, wall_time, rounds, rho, monotone) with a header row"""
    sizes = validate_size_list(args.sizes)
    rows = SpanningTreeService().bench(args.suite, sizes, seed=args.bench_seed, dim=args.dim)
    write_rows(
        ((row.suite, row.n, row.wall_time, row.rounds, row.rho, row.monotone) for row in rows),
        args.out,
        header=BENCH_HEADER,
    )
    return 0


def register(subparsers) -> None:
    mst = subparsers.add_parser("mst", help="minimum spanning tree by single-tree Boruvka")
    add_input_arguments(mst)
    mst.add_argument("--oracle", action="store_true", help="use the O(n^2) Prim reference instead")
    mst.add_argument("--edges-out", help="edge list CSV path (default: standard output)")
    mst.add_argument("--summary-out", help="summary JSON path")
    mst.add_argument("--tree-json", help="write the cover tree as JSON")
    mst.set_defaults(handler=mst_command)

    bench = subparsers.add_parser("bench", help="timing harness on seeded uniform clouds")
    bench.add_argument("--suite", choices=BENCH_SUITES, default="mst")
    bench.add_argument("--sizes", required=True, help="comma-separated sizes, e.g. 100,1000,10000")
    bench.add_argument("--dim", type=int, default=2)
    bench.add_argument("--seed", dest="bench_seed", type=int, help="dataset seed (default: global seed)")
    bench.add_argument("--out", help="output CSV path (default: standard output)")
    bench.set_defaults(handler=bench_command)
