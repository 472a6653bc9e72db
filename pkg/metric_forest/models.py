from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class MetricStats(BaseModel):
    n: int = Field(ge=2)
    d_min: float = Field(gt=0)
    diameter: float
    aspect_ratio: float = Field(ge=1)
    expansion_constant: float = Field(ge=2)

    @model_validator(mode="after")
    def _diameter_at_least_d_min(self):
        if self.diameter < self.d_min:
            raise ValueError("diameter must be at least d_min")
        return self


class MetricAxiomReport(BaseModel):
    n: int
    symmetry_ok: bool
    identity_ok: bool
    triangle_ok: bool
    worst_violation: float

    @property
    def ok(self) -> bool:
        return self.symmetry_ok and self.identity_ok and self.triangle_ok


class TreeReport(BaseModel):
    covering_ok: bool
    separation_ok: bool
    partition_ok: bool

    @property
    def ok(self) -> bool:
        return self.covering_ok and self.separation_ok and self.partition_ok


class MstSummary(BaseModel):
    n: int
    weight: float = Field(ge=0)
    edges: int
    rounds: int
    rho: Optional[float] = None
    aspect_ratio: Optional[float] = None
    expansion_constant: Optional[float] = None


class KdeSummary(BaseModel):
    queries: int
    references: int
    mode: Literal["exact", "approx"]
    epsilon: Optional[float] = None
    prunes: int = 0


class SkeletonReport(BaseModel):
    """Quality and guarantee metrics of one skeletonization run"""

    n_points: int
    n_dense: int
    msg_edges: int
    dense_tree_edges: int
    directed_hausdorff: float = Field(ge=0)
    dense_tree_hausdorff: float = Field(ge=0)
    objective_before: float = Field(ge=0)
    objective_after: float = Field(ge=0)
    gamma: Optional[float] = Field(default=None, ge=0)
    separation_ok: Optional[bool] = None
    vertices_covered: Optional[bool] = None
    hausdorff_ok: Optional[bool] = None
    delta_required: Optional[float] = Field(default=None, ge=0)
    vertex_bound: Optional[float] = Field(default=None, ge=0)
    vertex_bound_ok: Optional[bool] = None
    degree_recognition: Optional[float] = Field(default=None, ge=0, le=1)
    ght_conditions_hold: Optional[bool] = None


class GeneratorSpec(BaseModel):
    family: Literal[
        "line_cloud",
        "star",
        "sensible_tree",
        "eps_sample",
        "two_separated_sets",
        "uniform",
        "tube",
    ]
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0


class BenchRow(BaseModel):
    suite: str
    n: int
    wall_time: float = Field(ge=0)
    rounds: Optional[int] = None
    rho: Optional[float] = None
    monotone: bool = True
