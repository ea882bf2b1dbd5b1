"""Configuration loader for engine settings."""

import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from ..errors import ConfigError
from ..utils.helpers import read_json, read_yaml
from ..utils.logger import get_logger
from .settings import Config
from .validator import ConfigValidator

ENV_SEED = "MVNR_SEED"
ENV_LOG_LEVEL = "MVNR_LOG_LEVEL"


class ConfigLoader:
    """Load and manage engine configurations."""

    DEFAULT_FILES = [
        "mvnr.yaml",
        "mvnr.yml",
        "mvnr.json",
        ".mvnr.yaml",
    ]

    def __init__(self, project_root: str = ".", environ: Optional[Mapping[str, str]] = None):
        """
        Initialize config loader.

        Args:
            project_root: Directory searched for default config files
            environ: Environment to read overrides from (``os.environ`` by default)
        """
        self.project_root = Path(project_root)
        self.environ = os.environ if environ is None else environ
        self.logger = get_logger("ConfigLoader")
        self.config: Dict[str, Any] = {}

    def load_config(self, config_file: Optional[str] = None) -> Dict[str, Any]:
        """
        Load the raw configuration dictionary.

        An explicit ``config_file`` must exist; without one the default
        names are tried in order and a missing file means "all defaults".

        Raises:
            ConfigError: explicit file missing, unreadable or unsupported format
        """
        explicit = config_file is not None
        if config_file is None:
            config_file = self._find_config_file()

        if config_file is None:
            self.logger.debug("No configuration file found, using defaults")
            self.config = {}
            return self.config

        config_path = Path(config_file)
        if not config_path.is_absolute():
            config_path = self.project_root / config_path

        if not config_path.exists():
            if explicit:
                raise ConfigError(f"Config file not found: {config_file}")
            self.config = {}
            return self.config

        try:
            if config_path.suffix in (".yaml", ".yml"):
                self.config = read_yaml(str(config_path))
            elif config_path.suffix == ".json":
                self.config = read_json(str(config_path))
            else:
                raise ConfigError(f"Unsupported config format: {config_file}")
        except (OSError, ValueError, yaml.YAMLError) as e:
            raise ConfigError(f"Error loading config {config_file}: {e}") from e

        self.logger.info(f"Configuration loaded from {config_path}")
        return self.config

    def _find_config_file(self) -> Optional[str]:
        """Find default configuration file."""
        for file in self.DEFAULT_FILES:
            if (self.project_root / file).exists():
                return file
        return None

    def env_overrides(self) -> Dict[str, Any]:
        """Overrides taken from ``MVNR_SEED``."""
        overrides: Dict[str, Any] = {}
        seed = self.environ.get(ENV_SEED)
        if seed:
            try:
                overrides["seed"] = int(seed)
            except ValueError as e:
                raise ConfigError(f"{ENV_SEED} must be an integer, got {seed!r}") from e
        return overrides

    def env_log_level(self) -> Optional[str]:
        level = self.environ.get(ENV_LOG_LEVEL)
        return level.upper() if level else None

    def load_settings(self, config_file: Optional[str] = None, **overrides: Any) -> Config:
        """
        Load, merge and validate the configuration.

        Precedence: ``overrides`` (CLI flags) > environment > file > defaults.
        ``None`` overrides are ignored.

        Raises:
            ConfigError: listing every validation problem
        """
        data = dict(self.load_config(config_file) or {})
        data.update(self.env_overrides())
        data.update({key: value for key, value in overrides.items() if value is not None})

        is_valid, errors = ConfigValidator.validate(data)
        if not is_valid:
            raise ConfigError(errors)
        return Config.from_dict(data)


__all__ = ["ConfigLoader", "ENV_SEED", "ENV_LOG_LEVEL"]
