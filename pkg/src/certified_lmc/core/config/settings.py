"""Configuration schema definitions and loading helpers."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import AliasChoices, BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppInfo(BaseModel):
    """Identification block of the active profile."""

    name: str = "certified-lmc"
    env: str = "dev"
    log_level: str = "INFO"


class DataSettings(BaseModel):
    """Configuration block describing local data paths."""

    output_directory: str = "data/derived"


class PlannerSettings(BaseModel):
    """Defaults used when a command does not pin planner inputs."""

    default_eps: float = 0.1

    @field_validator("default_eps")
    @classmethod
    def _validate_eps(cls, value: float) -> float:
        if not (0.0 < value <= 0.5):
            raise ValueError("default_eps must lie in (0, 0.5]")
        return value


class SamplingSettings(BaseModel):
    """Execution layout of ensemble runs; none of it changes sampled values."""

    threads: int = 1
    chunk_size: int = 64
    progress: bool = False

    @field_validator("threads", "chunk_size")
    @classmethod
    def _validate_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("threads and chunk_size must be positive")
        return value


class AppSettings(BaseSettings):
    """Typed representation of application configuration sources."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        env_nested_delimiter="__",
    )

    app: AppInfo = Field(default_factory=AppInfo)
    data: DataSettings = Field(default_factory=DataSettings)
    planner: PlannerSettings = Field(default_factory=PlannerSettings)
    sampling: SamplingSettings = Field(default_factory=SamplingSettings)

    # CL_SEED wins over every --seed flag and config seed
    seed_override: int | None = Field(
        default=None, validation_alias=AliasChoices("CL_SEED")
    )

    def resolve_seed(self, seed: int) -> int:
        """Return the seed a run should use given the one requested on the command line."""
        return self.seed_override if self.seed_override is not None else seed


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(config_path: str | Path | None = None) -> AppSettings:
    """Load application settings from YAML and environment overrides."""

    load_dotenv(dotenv_path=".env", override=False)

    config_file = Path(config_path) if config_path else Path("config.yaml")
    yaml_config: Dict[str, Any] = {}
    if config_file.exists():
        with open(config_file, "r", encoding="utf-8") as f:
            yaml_config = yaml.safe_load(f) or {}

    # Only values actually present in the environment override the YAML profile.
    env_settings = AppSettings()
    env_dict = env_settings.model_dump(exclude_unset=True, by_alias=False)
    if env_settings.seed_override is not None:
        env_dict["CL_SEED"] = env_dict.pop("seed_override")

    settings = AppSettings(**_merge(yaml_config, env_dict))

    logger.debug(f"Loaded settings: {settings.model_dump_json(indent=2)}")
    return settings
