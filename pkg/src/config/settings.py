"""Configuration management using Pydantic Settings."""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppConfig(BaseSettings):
    """Application configuration."""

    model_config = SettingsConfigDict(extra="ignore")

    env: Literal["development", "production", "testing"] = Field(default="development", alias="APP_ENV")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", alias="LOG_LEVEL"
    )
    log_format: Literal["json", "console"] = Field(default="console", alias="LOG_FORMAT")


class HarnessConfig(BaseSettings):
    """Experiment harness configuration.

    Nothing here changes experiment output: these knobs only trade memory and
    wall time. Seeds and grid coordinates always come from the command line.
    """

    model_config = SettingsConfigDict(extra="ignore")

    max_workers: int = Field(default=1, ge=1, alias="HARNESS_MAX_WORKERS")
    desk_max_sensors: int = Field(default=10_000, ge=1, alias="HARNESS_DESK_MAX_SENSORS")
    sort_block_size: int = Field(default=256, ge=1, alias="HARNESS_SORT_BLOCK_SIZE")


class MethodDefaults(BaseSettings):
    """Defaults for ranking method parameters."""

    model_config = SettingsConfigDict(extra="ignore")

    # weight of the majority strategy
    vikor_v: float = Field(default=0.5, ge=0.0, le=1.0, alias="VIKOR_DEFAULT_V")


class Settings(BaseSettings):
    """Master settings combining all configuration sections."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app: AppConfig = Field(default_factory=AppConfig)
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    methods: MethodDefaults = Field(default_factory=MethodDefaults)


# Global settings instance
settings = Settings()
