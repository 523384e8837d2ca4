"""Configuration management."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SearchConfig(BaseModel):
    """Bounds used by the decision procedures and bounded searches."""

    max_exp: int = Field(
        default=12, ge=0, description="Largest exponent e tried by order_pow2 (powers 2^e)"
    )
    rel_bound: int = Field(
        default=3, ge=1, description="Max-norm bound K for relation-lattice searches"
    )
    involution_length: int = Field(
        default=4, ge=1, description="Factor length L for involution searches"
    )
    max_closure: int = Field(
        default=2_000_000,
        ge=1,
        description="Safety cap on the number of section-closure nodes per identity decision",
    )


class EnumerationConfig(BaseModel):
    """Batch enumeration configuration."""

    max_states: int = Field(
        default=3, ge=1, description="Largest state count enumerated over the binary alphabet"
    )
    workers: int = Field(default=1, ge=1, description="Worker processes used by enumerate")
    seed: int = Field(default=0, description="Seed for randomized helpers")


class Settings(BaseSettings):
    """Application settings."""

    # Application
    app_name: str = Field(default="tvgroups", description="Application name")
    version: str = Field(default="0.1.0", description="Application version")

    # Logging
    log_level: str = Field(default="WARNING", description="Logging level")
    log_format: str = Field(default="text", description="Log format: json or text")

    # Decision procedures
    search: SearchConfig = Field(default_factory=SearchConfig, description="Search bounds")

    # Enumeration
    enumeration: EnumerationConfig = Field(
        default_factory=EnumerationConfig, description="Enumeration settings"
    )

    # Configuration file path
    config_file: str = Field(
        default="config/main.yaml",
        description="Path to configuration file",
    )

    model_config = SettingsConfigDict(
        env_prefix="TVG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    def load_yaml_config(self) -> dict[str, Any]:
        """
        Load configuration from YAML file.

        Returns:
            Configuration dictionary
        """
        config_path = Path(self.config_file)
        if not config_path.exists():
            return {}

        with open(config_path, encoding="utf-8") as f:
            return yaml.safe_load(f) or {}

    def merge_yaml_config(self) -> None:
        """Merge YAML configuration into settings."""
        yaml_config = self.load_yaml_config()

        for key, value in yaml_config.items():
            if hasattr(self, key):
                # Nested sections are rebuilt so their validators run
                if key == "search" and isinstance(value, dict):
                    self.search = SearchConfig(**value)
                elif key == "enumeration" and isinstance(value, dict):
                    self.enumeration = EnumerationConfig(**value)
                else:
                    setattr(self, key, value)


def load_settings(config_file: str | None = None) -> Settings:
    """
    Build settings, optionally from an explicit YAML file.

    Args:
        config_file: Path overriding the default config location

    Returns:
        Settings with the YAML overlay merged in
    """
    settings = Settings() if config_file is None else Settings(config_file=config_file)
    if os.path.exists(settings.config_file):
        settings.merge_yaml_config()
    return settings


@lru_cache
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Application settings
    """
    return load_settings()
