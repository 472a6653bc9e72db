"""
Dataset service - seeded generation of every dataset family.
"""

import logging
from typing import Any, Dict, Optional

from pydantic import ValidationError

from metric_forest.config import settings
from metric_forest.datasets import Dataset, generate
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.models import GeneratorSpec

logger = logging.getLogger(__name__)


class DatasetService:
    """Service for dataset generation"""

    def generate(self, family: str, params: Dict[str, Any], seed: Optional[int] = None) -> Dataset:
        try:
            spec = GeneratorSpec(family=family, params=params, seed=settings.seed if seed is None else seed)
        except ValidationError as exc:
            raise InvalidArgumentError(f"Invalid generator spec: {exc.errors()[0]['msg']}", field="family", value=family)
        dataset = generate(spec)
        size = dataset.space.n if dataset.space is not None else dataset.tree.n_vertices
        logger.info(f"Generated {family} (seed {spec.seed}): {size} points")
        return dataset
