"""Logging configuration for the application."""

import logging
import sys
from typing import TextIO

from lalmeval.core.config import get_settings


def configure_logging(stream: TextIO = sys.stderr, level: str | None = None) -> None:
    """Configure application logging.

    Args:
        stream: Output stream for log messages; stdout is left to CLI
            output.
        level: Level name overriding ``Settings.log_level``.
    """
    settings = get_settings()
    level_name = (level or settings.log_level).upper()

    logging.basicConfig(
        level=getattr(logging, level_name),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=stream,
        force=True,
    )
    # Silence the per-request INFO lines of httpx.
    logging.getLogger("httpx").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the given name.

    Args:
        name: Logger name (typically __name__).

    Returns:
        Configured logger instance.
    """
    return logging.getLogger(name)
