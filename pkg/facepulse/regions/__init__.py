"""
Facial regions for facepulse.

This package provides grid and fixed-patch regions, per-region traces, the
quality battery and dynamic multi-region selection.
"""

from .fractal import dfa_alpha, katz_fd
from .grid import RegionBox, RgbTrace, extract_traces, fixed_patches, grid_partition, masked_trace
from .quality import RegionStats, compute_region_stats, sample_entropy, zero_crossings
from .selection import aggregate_regions, select_regions

__all__ = [
    "RegionBox",
    "RegionStats",
    "RgbTrace",
    "aggregate_regions",
    "compute_region_stats",
    "dfa_alpha",
    "extract_traces",
    "fixed_patches",
    "grid_partition",
    "katz_fd",
    "masked_trace",
    "sample_entropy",
    "select_regions",
    "zero_crossings",
]
