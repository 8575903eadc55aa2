"""Configuration module.

YAML + environment variable configuration with a process-wide instance.
"""

from pathgrad.config.defaults import DEFAULT_CONFIG
from pathgrad.config.settings import (
    Config,
    get_config,
    set_config,
)

__all__ = [
    "Config",
    "get_config",
    "set_config",
    "DEFAULT_CONFIG",
]
