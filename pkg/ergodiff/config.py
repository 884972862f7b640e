"""
Toolkit configuration following 12-factor app principles.
Configuration is loaded from keyword overrides, an optional TOML file,
environment variables (prefix ERGODIFF_) and a .env file, in that order.
"""
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)


class ClassifierSettings(BaseModel):
    """Thresholds of the divergence/convergence heuristics."""

    r0: float = Field(default=1.0, gt=0)
    doublings: int = Field(default=12, ge=3)
    blowup_log: float = 50.0
    tail_ratio: float = 1e-8
    geometric_ratio: float = Field(default=0.9, gt=0, lt=1)
    n_angles: int = Field(default=256, ge=8)
    angle_tol: float = 1e-10
    report_null_recurrence: bool = False


class DiagnosticSettings(BaseModel):
    """Defaults for the convergence diagnostic."""

    window_fraction: float = Field(default=0.25, gt=0, lt=0.5)
    n_batches: int = Field(default=10, ge=2)


class Settings(BaseSettings):
    """Toolkit settings loaded from the environment and an optional TOML file."""

    # Run
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    output_dir: Path = Path("out")

    # Integrator
    guard_radius: float = Field(default=1e6, gt=0)
    checkpoint_stride: int = Field(default=100, ge=1)

    classifier: ClassifierSettings = ClassifierSettings()
    diagnostic: DiagnosticSettings = DiagnosticSettings()

    # Per-subcommand tables of the TOML file ([simulate], [classify], ...)
    simulate: dict[str, Any] = {}
    classify: dict[str, Any] = {}
    ergodic: dict[str, Any] = {}
    order_check: dict[str, Any] = {}

    model_config = SettingsConfigDict(
        env_prefix="ERGODIFF_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        toml_file=None,
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            TomlConfigSettingsSource(settings_cls),
            env_settings,
            dotenv_settings,
        )

    def table(self, subcommand: str) -> dict:
        """Per-subcommand parameters read from the TOML file."""
        return dict(getattr(self, subcommand.replace("-", "_")))


def load_settings(config_file: Path | None = None, **overrides) -> Settings:
    """Build settings, optionally layering a TOML file under the overrides."""
    if config_file is None:
        return Settings(**overrides)

    class FileSettings(Settings):
        model_config = SettingsConfigDict(toml_file=config_file)

    return FileSettings(**overrides)


settings = Settings()
