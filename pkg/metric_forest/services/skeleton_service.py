"""
Skeleton service - tree reconstruction from a noisy cloud.
"""

import logging
from typing import Optional

from metric_forest.graphs import StraightLineTree
from metric_forest.metric_core import EUCLIDEAN, MetricSpaceView
from metric_forest.exceptions import InvalidArgumentError, MissingArgumentError
from metric_forest.skeleton import PipelineResult, full_pipeline

logger = logging.getLogger(__name__)


class SkeletonService:
    """Service running the skeletonization pipeline"""

    def skeletonize(
        self,
        cloud: MetricSpaceView,
        k: int,
        r: float,
        t: float,
        delta: float,
        eta: float = 0.01,
        iters: int = 0,
        truth: Optional[StraightLineTree] = None,
        noise: Optional[float] = None,
        kde_epsilon: Optional[float] = None,
    ) -> PipelineResult:
        """
        Optimized dense tree of a Euclidean cloud.

        A ground-truth tree requires the noise bound so the guarantee
        checkers can run.
        """
        if cloud.kind != EUCLIDEAN:
            raise InvalidArgumentError("Skeletonization needs a Euclidean point cloud", field="input")
        if truth is not None and noise is None:
            raise MissingArgumentError("noise")

        result = full_pipeline(
            cloud, k, r, t, delta, eta=eta, iters=iters, truth=truth, noise=noise, kde_epsilon=kde_epsilon
        )
        report = result.report
        logger.info(
            f"Skeleton: {report.n_dense} dense points, {report.dense_tree_edges} edges, "
            f"Hausdorff {report.directed_hausdorff:.6g}"
        )
        if truth is not None and report.ght_conditions_hold and not report.hausdorff_ok:
            logger.warning(
                f"Dense tree is {report.dense_tree_hausdorff:.6g} from the cloud, "
                f"above 2 * noise = {2.0 * noise:.6g}, although all guarantee conditions hold"
            )
        return result
