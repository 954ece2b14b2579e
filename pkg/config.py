"""
Configuration Management for Behaviour Clusters
Loads environment settings and validates pipeline run configuration
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import dotenv_values, load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from utils.errors import ConfigError

# Load environment variables from .env file
load_dotenv()

APP_VERSION = "1.0.0"

Measure = Literal["ellipsoid", "euclidean"]
Design = Literal["cluster_dummies", "aggregate", "combined"]
Experiment = Literal["predict", "forecast", "both"]


class Settings(BaseSettings):
    """Environment-level settings"""

    model_config = SettingsConfigDict(env_prefix="BEHAVIOUR_", env_file=".env", case_sensitive=False, extra="ignore")

    output_dir: Path = Path("output")
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1)
    log_level: str = "INFO"
    cache_dir_name: str = "cache"
    app_version: str = APP_VERSION


# Global settings instance
settings = Settings()


class PipelineConfig(BaseModel):
    """
    Run configuration for every stage of the pipeline

    Defaults: k = 3 clusters, a 60/40 train/test split, alpha = 0.05 and
    20,000 Monte Carlo draws per pair.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    input_path: Optional[Path] = None
    synthetic_spec: Optional[str] = None
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    k: int = Field(default=3, ge=2)
    measure: Measure = "ellipsoid"
    n_samples: int = Field(default=20_000, ge=1_000)
    seed: int = 0
    train_fraction: float = Field(default=0.6, gt=0.0, lt=1.0)
    experiment: Experiment = "both"
    designs: List[Design] = Field(default_factory=lambda: ["cluster_dummies", "aggregate", "combined"])
    output_dir: Path = Field(default_factory=lambda: settings.output_dir)
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)
    t_min: int = Field(default=8, ge=6)
    consecutive_misses: int = Field(default=3, ge=1)
    c_convention: Literal["squared", "sqrt"] = "squared"
    covariance: Literal["kronecker", "block_diagonal"] = "kronecker"
    stratify: bool = False
    ridge: float = Field(default=0.0, ge=0.0)
    h_severity_a: Optional[float] = Field(default=None, gt=0.0)
    h_severity_b: Optional[float] = Field(default=None, gt=0.0)
    excel: bool = False

    @field_validator("designs", mode="before")
    @classmethod
    def _split_designs(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("designs")
    @classmethod
    def _unique_designs(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one design is required")
        return list(dict.fromkeys(value))

    @model_validator(mode="after")
    def _one_source(self) -> "PipelineConfig":
        if (self.input_path is None) == (self.synthetic_spec is None):
            raise ValueError("exactly one of input_path or synthetic_spec must be given")
        if (self.h_severity_a is None) != (self.h_severity_b is None):
            raise ValueError("h_severity_a and h_severity_b must be given together")
        return self

    @property
    def severity(self) -> Optional[Tuple[float, float]]:
        """H-measure Beta parameters, None for the class-prior default"""
        if self.h_severity_a is None:
            return None
        return (self.h_severity_a, self.h_severity_b)

    @property
    def experiments(self) -> List[str]:
        """Experiments to run, in execution order"""
        return ["predict", "forecast"] if self.experiment == "both" else [self.experiment]

    def manifest_dict(self) -> Dict[str, Any]:
        """Configuration as recorded in the run manifest (no host-specific fields, file names only)"""
        values = self.model_dump(mode="json", exclude={"output_dir", "threads"})
        for key in ("input_path", "synthetic_spec"):
            if values[key] is not None:
                values[key] = Path(values[key]).name
        return values


def load_config(config_file: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """
    Build a validated PipelineConfig

    Precedence: command-line flag > config file > default (defaults for
    output_dir and threads come from the environment).

    Args:
        config_file: Optional flat key = value file
        overrides: Values given on the command line (None entries are ignored)

    Returns:
        Validated configuration
    """
    values: Dict[str, Any] = {}

    if config_file is not None:
        path = Path(config_file)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        values.update({key.strip().lower(): value for key, value in dotenv_values(path).items() if value is not None})
        logger.info(f"📄 Loaded config file: {path}")

    values.update({key: value for key, value in (overrides or {}).items() if value is not None})

    try:
        return PipelineConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
