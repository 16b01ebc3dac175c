"""
Logging setup for facepulse.

One package logger is shared by every module. Per-video evaluation may fan out
to worker processes, so records carry the process name and the optional log
file is written through a process-safe rotating handler.
"""

import logging
import os
from typing import Optional

from concurrent_log_handler import ConcurrentRotatingFileHandler

LOGGER_NAME = "facepulse"
LEVEL_ENV = "FACEPULSE_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(processName)s %(levelname)s %(message)s"
MAX_LOG_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 3


def resolve_level(verbose: bool = False, default: str = "INFO") -> int:
    """Logging level from the verbose flag, then FACEPULSE_LOG_LEVEL, then ``default``.

    Unknown level names fall back to INFO.
    """
    if verbose:
        return logging.DEBUG
    name = os.environ.get(LEVEL_ENV, default).strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def setup_logging(log_file: Optional[str] = None, level: int = logging.INFO) -> logging.Logger:
    """Configure the facepulse logger.

    Calling it again replaces the previous handlers.

    Args:
        log_file: Rotating log file shared by worker processes (console only if None)
        level: Logging level

    Returns:
        The configured package logger
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    handlers = [logging.StreamHandler()]
    if log_file:
        os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)
        handlers.append(
            ConcurrentRotatingFileHandler(log_file, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS)
        )
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def get_logger() -> logging.Logger:
    return logging.getLogger(LOGGER_NAME)
