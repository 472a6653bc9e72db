"""
Spanning tree service - minimum spanning trees and the timing bench.
"""

import logging
from typing import List, Optional, Tuple

from metric_forest.boruvka_mst import SpanningTree, mst_oracle_prim, mst_singletree_boruvka, rho_of_spanning_tree
from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree, build
from metric_forest.datasets import gen_uniform_cloud
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.knn import all_nearest_neighbors
from metric_forest.logging_config import PerformanceLogger, log_with_context
from metric_forest.metric_core import MetricSpaceView, expansion_constant, pairwise_extremes
from metric_forest.models import BenchRow, MstSummary
from metric_forest.services import build_index
from metric_forest.validators import validate_integer

logger = logging.getLogger(__name__)

BENCH_SUITES = ("mst", "knn", "build")


class SpanningTreeService:
    """Service for MST computation and benchmarking"""

    def mst(
        self,
        space: MetricSpaceView,
        oracle: bool = False,
        insertion_seed: Optional[int] = None,
    ) -> Tuple[SpanningTree, MstSummary, Optional[CompressedCoverTree]]:
        """
        Minimum spanning tree with its summary.

        With ``oracle`` the O(n^2) Prim reference is used and no cover tree is
        built. The expansion constant is reported only up to the verifier cap.
        """
        tree = None
        if oracle:
            spanning = mst_oracle_prim(space)
        else:
            tree = build_index(space, insertion_seed)
            spanning = mst_singletree_boruvka(tree)

        summary = MstSummary(n=space.n, weight=spanning.total_weight, edges=len(spanning.edges), rounds=spanning.rounds)
        if space.n >= 2:
            d_min, diameter = pairwise_extremes(space)
            summary.rho = rho_of_spanning_tree(spanning)
            summary.aspect_ratio = diameter / d_min
            if space.n <= settings.metric_verify_cap:
                summary.expansion_constant = expansion_constant(space)

        logger.info(f"MST on n={space.n}: weight {summary.weight:.6g} in {summary.rounds} rounds")
        return spanning, summary, tree

    def bench(self, suite: str, sizes: List[int], seed: Optional[int] = None, dim: int = 2) -> List[BenchRow]:
        """
        Wall time per size on uniform clouds.

        ``monotone`` is False when a size ran faster than the previous one.
        """
        if suite not in BENCH_SUITES:
            raise InvalidArgumentError(f"Unknown bench suite '{suite}'", field="suite", value=suite)
        seed = settings.seed if seed is None else seed
        dim = validate_integer(dim, "dim", min_value=1)

        rows: List[BenchRow] = []
        previous = None
        for n in sizes:
            space = gen_uniform_cloud(n, dim, seed)
            rounds = None
            rho = None
            with PerformanceLogger(logger, f"bench {suite}", n=n, dim=dim) as timer:
                if suite == "build":
                    build(space)
                elif suite == "knn":
                    all_nearest_neighbors(build(space), 1)
                else:
                    spanning = mst_singletree_boruvka(build(space))
                    rounds = spanning.rounds
                    rho = rho_of_spanning_tree(spanning) if spanning.edges else None
            wall_time = timer.duration
            rows.append(
                BenchRow(
                    suite=suite,
                    n=n,
                    wall_time=wall_time,
                    rounds=rounds,
                    rho=rho,
                    monotone=previous is None or wall_time >= previous,
                )
            )
            log_with_context(logger, "debug", f"bench row {suite} n={n}", suite=suite, n=n, wall_time=wall_time, rounds=rounds)
            previous = wall_time
        return rows
