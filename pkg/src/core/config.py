"""Configuration management for Proxlab."""

from pathlib import Path
from typing import Tuple, Type

from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory settings.

    Values come from explicit keyword arguments only (the command line builds
    them from flags); the environment is never consulted.
    """

    model_config = SettingsConfigDict(
        case_sensitive=False,
        validate_default=True,
    )

    # Application settings
    log_level: str = Field(default="INFO", description="Logging level")

    # Resource caps
    cap_box: int = Field(
        default=250_000,
        ge=1,
        description="Maximum number of lattice points a box scan may visit",
    )
    cap_subsets: int = Field(
        default=200_000,
        ge=1,
        description="Maximum number of row subsets an exhaustive enumeration may visit",
    )

    # Sweeps and generators
    sweep_workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes for sweeps (1 runs in-process)",
    )
    resample_budget: int = Field(
        default=200,
        ge=1,
        description="Attempts allowed to a random generator before giving up",
    )

    # Data paths
    output_dir: Path = Field(
        default=Path("./reports"),
        description="Default directory for reports and traces",
    )
    schema_version: int = Field(default=1, description="Instance file schema version")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the global settings instance."""
    return settings
