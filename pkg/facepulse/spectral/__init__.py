"""
Heart-rate estimation for facepulse.

This package provides per-window heart-rate estimation, heart-rate series and
reference-signal processing.
"""

from .heartrate import HrSeries, estimate_hr, hr_series, peak_frequency, series_from_estimates
from .reference import detect_r_peaks, mask_reference_gaps, reference_hr, resample_to

__all__ = [
    "HrSeries",
    "detect_r_peaks",
    "estimate_hr",
    "hr_series",
    "mask_reference_gaps",
    "peak_frequency",
    "reference_hr",
    "resample_to",
    "series_from_estimates",
]
