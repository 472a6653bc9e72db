"""
Density service - sigmoid kernel density of query points.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from metric_forest.kde import fit_sigmoid, kde_approx, kde_exact
from metric_forest.metric_core import MetricSpaceView
from metric_forest.models import KdeSummary
from metric_forest.services import build_index

logger = logging.getLogger(__name__)


class DensityService:
    """Service for exact and tree-approximated KDE"""

    def kde(
        self,
        reference: MetricSpaceView,
        queries,
        r: float,
        t: float,
        epsilon: Optional[float] = None,
        insertion_seed: Optional[int] = None,
    ) -> Tuple[List[Tuple[int, float]], KdeSummary]:
        """Rows (query-index, f) and a run summary"""
        kernel = fit_sigmoid(r, t)
        if epsilon is None:
            result = kde_exact(kernel, reference, queries)
        else:
            result = kde_approx(kernel, build_index(reference, insertion_seed), queries, epsilon)

        rows = [(idx, float(value)) for idx, value in enumerate(np.asarray(result.values))]
        summary = KdeSummary(
            queries=len(rows),
            references=reference.n,
            mode=result.mode,
            epsilon=result.epsilon,
            prunes=result.prunes,
        )
        logger.info(f"KDE ({result.mode}): {summary.queries} queries against {summary.references} points")
        return rows, summary
