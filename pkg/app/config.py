"""Application Configuration - Environment settings and run configuration files"""
import json
from pathlib import Path
from typing import Literal

from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from app.domain.errors import ConfigError
from app.domain.schemas import PipelineOptions, SimulationConfig


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    Uses pydantic-settings for validation and type safety.
    """

    # App Settings
    APP_NAME: str = "Chapter Engagement Analytics"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Pipeline defaults
    DEFAULT_OUTPUT_DIR: str = "out"
    MAX_GAP_MINUTES: float = 120.0
    GAP_PERCENTILE: int = 95

    # API Settings
    CORS_ORIGINS: str = "*"
    API_PREFIX: str = "/api"

    # Logging
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True

    @property
    def cors_origins(self) -> list[str]:
        if self.CORS_ORIGINS.strip() == "*":
            return ["*"]
        return [origin.strip() for origin in self.CORS_ORIGINS.split(",") if origin.strip()]


# Singleton settings instance
settings = Settings()


class RunConfig(PipelineOptions):
    """
    One pipeline run as described by a JSON config file.

    Input paths default to log.csv and grades.csv inside output_dir so that
    simulate, score and evaluate chain on a single file.
    """

    output_dir: Path = Field(default_factory=lambda: Path(settings.DEFAULT_OUTPUT_DIR))
    log_path: Path | None = None
    grades_path: Path | None = None
    as_of_week: int | None = None
    max_gap_minutes: float = Field(default_factory=lambda: settings.MAX_GAP_MINUTES, gt=0, le=120)
    gap_percentile: int = Field(default_factory=lambda: settings.GAP_PERCENTILE, ge=1, le=100)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)

    @model_validator(mode="after")
    def _check_week(self) -> "RunConfig":
        if self.as_of_week is not None and not 1 <= self.as_of_week <= self.calendar.num_weeks:
            raise ValueError(f"as_of_week must be in [1, {self.calendar.num_weeks}], got {self.as_of_week}")
        return self

    @property
    def resolved_log_path(self) -> Path:
        return self.log_path or self.output_dir / "log.csv"

    @property
    def resolved_grades_path(self) -> Path:
        return self.grades_path or self.output_dir / "grades.csv"

    @property
    def final_week(self) -> int:
        return self.as_of_week or self.calendar.num_weeks

    def with_overrides(self, **overrides) -> "RunConfig":
        """
        Copy with command-line overrides applied and re-validated.

        None values leave the file setting untouched.

        Raises:
            ConfigError: An override breaks validation
        """
        data = self.model_dump()
        simulation_seed = overrides.pop("seed", None)
        data.update({key: value for key, value in overrides.items() if value is not None})
        if simulation_seed is not None:
            data["simulation"]["seed"] = simulation_seed
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}")


def load_run_config(path: str | Path | None = None) -> RunConfig:
    """
    Load a run configuration from a JSON file.

    Args:
        path: Config file; None gives the defaults

    Raises:
        ConfigError: Unreadable file, malformed JSON or failed validation
    """
    if path is None:
        return RunConfig()

    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON: {e}")

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid configuration: {e}")
