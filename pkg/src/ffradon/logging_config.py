"""
Logging configuration for ffradon.
"""

import logging
import os
import sys
from typing import Optional

LOG_LEVEL_ENV = "FFRADON_LOG_LEVEL"


def setup_logging(
    level: Optional[str] = None,
    format_string: Optional[str] = None,
    stream: Optional[sys.stderr.__class__] = None,
) -> logging.Logger:
    """
    Set up structured logging for ffradon.

    Reports are written to their own sink; logging always goes to stderr so
    that json-lines output on stdout stays machine-readable.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL). If None,
               read from ``FFRADON_LOG_LEVEL`` (default INFO).
        format_string: Custom format string. If None, uses a structured format.
        stream: Output stream. Defaults to stderr.

    Returns:
        Configured package logger
    """
    if level is None:
        level = os.getenv(LOG_LEVEL_ENV, "INFO")

    if format_string is None:
        format_string = "[%(levelname)s] %(name)s: %(message)s"

    if stream is None:
        stream = sys.stderr

    numeric_level = getattr(logging, level.upper(), logging.INFO)

    logging.basicConfig(
        level=numeric_level,
        format=format_string,
        stream=stream,
        force=True,
    )

    logger = logging.getLogger("ffradon")
    logger.setLevel(numeric_level)

    return logger


def get_logger(name: str = "ffradon") -> logging.Logger:
    """
    Get a logger instance for a specific module.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
