"""
structlog setup shared by the CLI and worker processes
"""

import logging
import sys
from typing import Optional

import structlog

from .config import LoggingConfig


def configure_logging(config: Optional[LoggingConfig] = None, debug: bool = False):
    """
    Configure structlog on top of the stdlib root logger

    Records go to stderr so that stdout stays reserved for command output.

    Args:
        config: Level and renderer; defaults to INFO with the console renderer
        debug: Force the DEBUG level
    """
    config = config or LoggingConfig()
    level = "DEBUG" if debug else config.level

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer() if config.format == "json"
            else structlog.dev.ConsoleRenderer(colors=False),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
