"""
Skeleton command - ``skeletonize``.
"""

import logging

from metric_forest.commands import add_input_arguments, load_input
from metric_forest.error_handlers import with_error_handling
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.io import read_tree, write_json, write_tree
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.skeleton_service import SkeletonService

logger = logging.getLogger(__name__)


@with_error_handling
def skeletonize_command(args) -> int:
    """
    Vertices CSV, edges CSV (a, b, length) and a report JSON; the report goes
    to standard output unless --report-out is given.
    """
    if (args.truth_vertices is None) != (args.truth_edges is None):
        raise InvalidArgumentError("--truth-vertices and --truth-edges go together", field="truth")

    with PerformanceLogger(logger, "Skeletonization") as timer:
        cloud = load_input(args)
        timer.note(n=cloud.n)
        truth = None
        if args.truth_vertices is not None:
            truth = read_tree(args.truth_vertices, args.truth_edges, args.header)

        result = SkeletonService().skeletonize(
            cloud,
            args.k,
            args.r,
            args.t,
            args.delta,
            eta=args.eta,
            iters=args.iters,
            truth=truth,
            noise=args.noise,
            kde_epsilon=args.kde_epsilon,
        )
        write_tree(result.tree, args.vertices_out, args.edges_out)
        write_json(result.report.model_dump(), args.report_out)
    return 0


def register(subparsers) -> None:
    skeletonize = subparsers.add_parser("skeletonize", help="reconstruct a straight-line tree from a noisy cloud")
    add_input_arguments(skeletonize)
    skeletonize.add_argument("--k", type=int, required=True, help="neighbors per point in MSG_k")
    skeletonize.add_argument("--r", type=float, required=True, help="kernel midpoint")
    skeletonize.add_argument("--t", type=float, required=True, help="kernel width")
    skeletonize.add_argument("--delta", type=float, required=True, help="sparsity radius in the path metric")
    skeletonize.add_argument("--eta", type=float, default=0.01, help="gradient step size")
    skeletonize.add_argument("--iters", type=int, default=0, help="optimization iterations")
    skeletonize.add_argument("--kde-epsilon", type=float, help="use tree-approximated density")
    skeletonize.add_argument("--truth-vertices", help="ground-truth tree vertices CSV")
    skeletonize.add_argument("--truth-edges", help="ground-truth tree edges CSV")
    skeletonize.add_argument("--noise", type=float, help="noise bound epsilon of the cloud")
    skeletonize.add_argument("--vertices-out", help="output vertices CSV path")
    skeletonize.add_argument("--edges-out", help="output edges CSV path")
    skeletonize.add_argument("--report-out", help="report JSON path (default: standard output)")
    skeletonize.set_defaults(handler=skeletonize_command)
