"""
Configuration Management for magrobin

Centralized, typed settings loaded from the environment (and an optional
.env file) with Pydantic. Solver tolerances, the sweep worker pool size and
the output locations all live here.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Toolkit settings with validation and defaults."""

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        "INFO", alias="MAGROBIN_LOG_LEVEL"
    )
    log_file: Optional[Path] = Field(None, alias="MAGROBIN_LOG_FILE")

    # Orchestration
    workers: int = Field(1, alias="MAGROBIN_WORKERS", ge=1, le=64)
    output_dir: Path = Field(Path("results"), alias="MAGROBIN_OUTPUT_DIR")
    fixtures_path: Optional[Path] = Field(None, alias="MAGROBIN_FIXTURES")
    seed: int = Field(0, alias="MAGROBIN_SEED", ge=0)

    # Eigensolvers
    residual_tol: float = Field(1e-10, alias="MAGROBIN_RESIDUAL_TOL", gt=0.0, le=1e-4)
    max_inverse_iterations: int = Field(
        500, alias="MAGROBIN_MAX_INVERSE_ITERATIONS", ge=1
    )
    arpack_maxiter: int = Field(20000, alias="MAGROBIN_ARPACK_MAXITER", ge=100)
    dense_oracle_limit: int = Field(3000, alias="MAGROBIN_DENSE_LIMIT", ge=16)

    # Windows and quadrature
    max_window_modes: int = Field(600, alias="MAGROBIN_MAX_WINDOW_MODES", ge=8)
    quadrature_rtol: float = Field(1e-7, alias="MAGROBIN_QUADRATURE_RTOL", gt=0.0)
    max_quadrature_nodes: int = Field(128, alias="MAGROBIN_MAX_QUADRATURE_NODES", ge=16)

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"
        populate_by_name = True

    @field_validator("workers", "seed", mode="before")
    @classmethod
    def validate_integer_text(cls, v):
        """Accept integers given as text, e.g. MAGROBIN_WORKERS=' 4 '."""
        if isinstance(v, str):
            return int(v.strip())
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def validate_log_level(cls, v):
        """Normalize the level name."""
        if isinstance(v, str):
            return v.strip().upper()
        return v

    @property
    def fixtures_file(self) -> Path:
        """Location of the derived-constant fixture file."""
        if self.fixtures_path is not None:
            return self.fixtures_path
        return Path(__file__).resolve().parent.parent / "fixtures" / "derived.json"


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Settings: Toolkit settings loaded from environment.
    """
    return Settings()


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment."""
    get_settings.cache_clear()
