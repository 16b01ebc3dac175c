"""
Pipelines for facepulse.

This package provides per-video extraction, dataset evaluation and run plots.
"""

from .evaluate import (
    EvaluationRun,
    config_label,
    config_matrix,
    default_grouping,
    load_video,
    run_evaluate,
)
from .extract import ExtractResult, PreparedVideo, VideoInput, run_extract, save_extract
from .plots import run_plots

__all__ = [
    "EvaluationRun",
    "ExtractResult",
    "PreparedVideo",
    "VideoInput",
    "config_label",
    "config_matrix",
    "default_grouping",
    "load_video",
    "run_evaluate",
    "run_extract",
    "run_plots",
    "save_extract",
]
