"""
Utilities package for facepulse.

This package provides configuration, logging, error and parallelism helpers.
"""

from .config import Config
from .logging import get_logger, resolve_level, setup_logging
from .parallel import parallel_map, parallel_map_with_failures

__all__ = [
    "Config",
    "setup_logging",
    "resolve_level",
    "get_logger",
    "parallel_map",
    "parallel_map_with_failures",
]
