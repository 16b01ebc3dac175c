"""
Evaluation for facepulse.

This package provides series alignment, error metrics and report aggregation.
"""

from .alignment import AlignmentParams, apply_alignment, dataset_lag, estimate_alignment
from .metrics import MetricsReport, compute_metrics, pearson
from .reports import AggregateReport, aggregate_dataset, render_table, write_reports

__all__ = [
    "AggregateReport",
    "AlignmentParams",
    "MetricsReport",
    "aggregate_dataset",
    "apply_alignment",
    "compute_metrics",
    "dataset_lag",
    "estimate_alignment",
    "pearson",
    "render_table",
    "write_reports",
]
