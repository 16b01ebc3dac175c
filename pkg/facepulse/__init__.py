"""
facepulse - Remote photoplethysmography from facial video and landmarks.

This package extracts blood-volume-pulse signals and heart-rate series from
face videos with per-frame landmarks, and evaluates them against contact
references.
"""

__version__ = "0.1.0"

from .cli import main
from .pipeline import run_evaluate, run_extract, run_plots
from .rppg import convert
from .spectral import estimate_hr, hr_series
from .utils import Config, get_logger, setup_logging

__all__ = [
    "main",
    "Config",
    "convert",
    "estimate_hr",
    "get_logger",
    "hr_series",
    "run_evaluate",
    "run_extract",
    "run_plots",
    "setup_logging",
]
