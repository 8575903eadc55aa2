"""Configuration management for pathgrad.

Loads configuration from YAML file and environment variables.
Environment variables override YAML defaults.
"""

from __future__ import annotations

import copy
import logging
import os
from pathlib import Path
from typing import Any

import yaml

from pathgrad.config.defaults import DEFAULT_CONFIG

logger = logging.getLogger(__name__)


def _merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge ``override`` into ``base`` (in place)."""
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


class Config:
    """Configuration manager for pathgrad.

    Loads from:
    1. config/pathgrad.yaml (defaults, committed)
    2. config/pathgrad.local.yaml (local overrides, not committed)
    3. Environment variables (runtime overrides)
    """

    def __init__(self, config_path: Path | None = None):
        """Initialize configuration.

        Args:
            config_path: Optional path to config file.
        """
        self._data: dict[str, Any] = {}
        self._load_config(config_path)

    def _load_config(self, config_path: Path | None) -> None:
        """Load configuration from file and environment."""
        self._data = copy.deepcopy(DEFAULT_CONFIG)

        base_path = config_path or self._find_config_file()
        if base_path and base_path.exists():
            _merge(self._data, self._load_yaml(base_path))
            logger.debug("Loaded configuration from %s", base_path)

        local_path = base_path.parent / "pathgrad.local.yaml" if base_path else None
        if local_path and local_path.exists():
            _merge(self._data, self._load_yaml(local_path))

        self._apply_env_overrides()

    def _find_config_file(self) -> Path | None:
        """Find the configuration file.

        Searches in standard locations.
        """
        candidates = [
            Path("config/pathgrad.yaml"),
            Path("pathgrad.yaml"),
            Path.home() / ".config" / "pathgrad" / "config.yaml",
        ]
        for path in candidates:
            if path.exists():
                return path
        return None

    def _load_yaml(self, path: Path) -> dict[str, Any]:
        """Load YAML file."""
        with open(path) as f:
            return yaml.safe_load(f) or {}

    def _apply_env_overrides(self) -> None:
        """Apply environment variable overrides.

        Supported env vars:
        - PATHGRAD_COEFFICIENT_DIR
        - PATHGRAD_COEFFICIENT_FALLBACK
        - PATHGRAD_SEED
        - PATHGRAD_SAMPLES
        - PATHGRAD_WORKERS
        """
        env_mappings = {
            "PATHGRAD_COEFFICIENT_DIR": ("coefficients", "directory", str),
            "PATHGRAD_COEFFICIENT_FALLBACK": ("coefficients", "fallback", str),
            "PATHGRAD_SEED": ("estimators", "seed", int),
            "PATHGRAD_SAMPLES": ("estimators", "samples", int),
            "PATHGRAD_WORKERS": ("estimators", "workers", int),
        }

        for env_var, (section, key, parse) in env_mappings.items():
            value = os.environ.get(env_var)
            if value is not None:
                self._data.setdefault(section, {})[key] = parse(value)

    def get(self, *path: str, default: Any = None) -> Any:
        """Get configuration value by path.

        Args:
            *path: Keys to navigate (e.g., "oracle", "richardson_levels")
            default: Default value if not found

        Returns:
            Configuration value
        """
        value: Any = self._data
        for key in path:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    # Convenience properties
    @property
    def coefficient_dir(self) -> Path:
        """Directory holding rational-surface coefficient files."""
        return Path(self.get("coefficients", "directory", default="coefficients"))

    @property
    def coefficient_fallback(self) -> str:
        """Behavior when a coefficient file is missing: 'oracle' or 'error'."""
        return self.get("coefficients", "fallback", default="oracle")

    @property
    def seed(self) -> int:
        return int(self.get("estimators", "seed", default=0))

    @property
    def samples(self) -> int:
        return int(self.get("estimators", "samples", default=100_000))

    @property
    def workers(self) -> int:
        return int(self.get("estimators", "workers", default=1))

    @property
    def chunk_size(self) -> int:
        return int(self.get("estimators", "chunk_size", default=10_000))

    @property
    def max_terms(self) -> int:
        """Iteration cap for special-function series."""
        return int(self.get("specfun", "max_terms", default=1000))


# Global config instance
_config: Config | None = None


def get_config(reload: bool = False) -> Config:
    """Get the global configuration instance.

    Args:
        reload: Force reload configuration

    Returns:
        Config instance
    """
    global _config
    if _config is None or reload:
        _config = Config()
    return _config


def set_config(config: Config) -> None:
    """Set the global configuration instance.

    Args:
        config: Config instance to use
    """
    global _config
    _config = config
