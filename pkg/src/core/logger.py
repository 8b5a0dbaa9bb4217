"""Logging configuration for Proxlab.

Log lines go to stderr; stdout is reserved for the JSON and summaries the
command line prints.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from .config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(
    name: str,
    level: Optional[str] = None,
    log_file: Optional[Path] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure and return a logger instance.

    Args:
        name: Logger name (typically __name__)
        level: Logging level (default from settings)
        log_file: Optional file path for logging
        stream: Console stream (default: the current sys.stderr)

    Returns:
        Configured logger instance
    """
    level = (level or settings.log_level).upper()
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        if isinstance(handler, logging.FileHandler):
            handler.close()

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def set_level(level: str, log_file: Optional[Path] = None) -> None:
    """Re-level every Proxlab logger (used by the command line)."""
    for name in list(logging.root.manager.loggerDict):
        if name == "proxlab" or name.startswith("src."):
            setup_logger(name, level=level, log_file=log_file)


# Default logger
logger = setup_logger("proxlab")
