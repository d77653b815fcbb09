"""
Configuration and logging utilities
"""

from .config import (
    AppConfig,
    ConfigError,
    ConfigManager,
    ExperimentSettings,
    LoggingConfig,
    RadioSettings,
    get_config,
    init_config,
)
from .logging import configure_logging

__all__ = [
    "AppConfig",
    "ConfigError",
    "ConfigManager",
    "ExperimentSettings",
    "LoggingConfig",
    "RadioSettings",
    "get_config",
    "init_config",
    "configure_logging",
]
