"""
Configuration utilities for facepulse.

This module provides functions for loading, validating, and managing configuration.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from .exceptions import ConfigError, ValidationError
from .logging import get_logger
from .schemas import DatasetDescriptor, FacePulseConfig, PipelineConfig

logger = get_logger()

DEFAULT_CONFIG_FILE = "config/facepulse.yaml"


def default_config_file() -> str:
    """Return the configuration path, honouring FACEPULSE_CONFIG from a .env file.

    Returns:
        Path to the configuration file
    """
    for env_file in (Path("config/.env"), Path(".env")):
        if env_file.exists():
            load_dotenv(env_file, override=False)
    return os.environ.get("FACEPULSE_CONFIG", DEFAULT_CONFIG_FILE)


def default_config_dict() -> Dict[str, Any]:
    """Return the default configuration as a plain dictionary."""
    return FacePulseConfig().model_dump(mode="json")


class Config:
    """Configuration manager for facepulse."""

    def __init__(self, config_file: Optional[str] = None):
        """Initialize the configuration manager.

        Args:
            config_file: Path to the configuration file (defaults to FACEPULSE_CONFIG
                or config/facepulse.yaml)

        Raises:
            ConfigError: If the configuration file cannot be loaded
            ValidationError: If the configuration is invalid
        """
        self.config_file = config_file or default_config_file()
        self.config = self._load_config()
        self.model = self.validate_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file or create default if not exists.

        Returns:
            Dictionary with loaded configuration

        Raises:
            ConfigError: If the configuration file cannot be loaded
        """
        if not os.path.exists(self.config_file):
            self._create_default_config()

        try:
            with open(self.config_file, "r") as f:
                data = yaml.safe_load(f)
        except (yaml.YAMLError, IOError) as e:
            logger.error(f"Failed to load configuration: {e}")
            raise ConfigError(f"Failed to load configuration: {e}") from e

        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration root must be a mapping: {self.config_file}")
        return data

    def validate_config(self) -> FacePulseConfig:
        """Validate the configuration against the schema.

        Returns:
            The validated configuration model

        Raises:
            ValidationError: If the configuration is invalid
        """
        try:
            model = FacePulseConfig(**self.config)
            logger.debug("Configuration validated successfully")
            return model
        except PydanticValidationError as e:
            logger.error(f"Invalid configuration: {e}")
            raise ValidationError(f"Invalid configuration: {e}") from e

    def _create_default_config(self) -> None:
        """Create a default configuration file."""
        config_dir = os.path.dirname(self.config_file)
        if config_dir:
            os.makedirs(config_dir, exist_ok=True)

        with open(self.config_file, "w") as f:
            yaml.safe_dump(default_config_dict(), f, default_flow_style=False, sort_keys=False)

        logger.info(f"Default configuration created at {self.config_file}")


def build_pipeline_config(base: PipelineConfig, **overrides: Any) -> PipelineConfig:
    """Re-validate a pipeline configuration with some fields replaced.

    Nested sections may be given as dictionaries; they are merged into the base section.

    Raises:
        ValidationError: If the result is invalid
    """
    data = base.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return PipelineConfig(**data)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid pipeline configuration: {e}") from e


def load_dataset_descriptor(path: str) -> DatasetDescriptor:
    """Load and validate a dataset descriptor YAML file.

    Relative roots are resolved against the descriptor's directory.

    Args:
        path: Path to the descriptor

    Returns:
        Validated DatasetDescriptor

    Raises:
        ConfigError: If the file cannot be read
        ValidationError: If the descriptor is invalid
    """
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except (yaml.YAMLError, IOError) as e:
        raise ConfigError(f"Failed to load dataset descriptor {path}: {e}") from e

    try:
        descriptor = DatasetDescriptor(**data)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid dataset descriptor {path}: {e}") from e

    root = Path(descriptor.root)
    if not root.is_absolute():
        descriptor.root = str((Path(path).parent / root).resolve())
    return descriptor
