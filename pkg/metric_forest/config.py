"""
Library and CLI configuration management.

Centralized configuration using Pydantic for validation and type safety.
Every field can be overridden from the environment with the
``METRIC_FOREST_`` prefix (for example ``METRIC_FOREST_SEED=7``) or from a
local ``.env`` file.
"""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings with environment variable support"""

    # Application
    app_name: str = "metric-forest"
    app_version: str = "1.0.0"

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None
    json_logs: bool = False

    # Numerics
    distance_tolerance: float = Field(default=1e-12, ge=0.0)
    metric_verify_cap: int = Field(default=2000, ge=1)
    max_explicit_n: int = Field(default=20000, ge=1)

    # Reproducibility and execution
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    assert_mode: bool = False

    # Generators and optimization
    generation_budget_factor: int = Field(default=10_000, ge=1)
    backtracking_steps: int = Field(default=20, ge=0)

    model_config = SettingsConfigDict(
        env_prefix="METRIC_FOREST_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
