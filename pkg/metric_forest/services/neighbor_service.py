"""
Neighbor service - batch k-nearest-neighbor queries.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from metric_forest.knn import knn_batch
from metric_forest.logging_config import PerformanceLogger
from metric_forest.metric_core import MetricSpaceView, Query
from metric_forest.services import build_index
from metric_forest.validators import validate_integer, validate_positive_float

logger = logging.getLogger(__name__)

KnnRow = Tuple[int, int, int, float]


class NeighborService:
    """Service for k-NN queries against a reference cloud"""

    def knn(
        self,
        reference: MetricSpaceView,
        queries: Sequence[Query],
        k: int,
        epsilon: Optional[float] = None,
        insertion_seed: Optional[int] = None,
    ) -> List[KnnRow]:
        """
        Rows (query-index, rank, ref-index, distance), ranks starting at 1.

        Args:
            reference: indexed reference space
            queries: point ids of ``reference`` or coordinate rows
            k: neighbors per query
            epsilon: approximation factor; exact search when None
        """
        k = validate_integer(k, "k", min_value=1)
        if epsilon is not None:
            epsilon = validate_positive_float(epsilon, "epsilon")

        queries = list(queries)
        mode = "exact" if epsilon is None else "approx"
        with PerformanceLogger(logger, f"k-NN {mode}", n=reference.n, queries=len(queries), k=k) as timer:
            tree = build_index(reference, insertion_seed)
            results = knn_batch(tree, queries, k, epsilon=epsilon)

            rows: List[KnnRow] = []
            for qi, result in enumerate(results):
                for rank, (ref, dist) in enumerate(result.neighbors, start=1):
                    rows.append((qi, rank, int(ref), float(dist)))
            timer.note(rows=len(rows))
        return rows
