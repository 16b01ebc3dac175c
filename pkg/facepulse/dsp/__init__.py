"""
Signal-processing primitives for facepulse.

This package provides filtering, detrending, windowing and Welch spectra.
"""

from .filters import bandpass_fir, check_band, design_bandpass, detrend, moving_average
from .signals import Signal1D, Spectrum
from .spectrum import welch_from_params, welch_psd
from .windows import sliding_windows, window_length, window_starts

__all__ = [
    "Signal1D",
    "Spectrum",
    "bandpass_fir",
    "check_band",
    "design_bandpass",
    "detrend",
    "moving_average",
    "sliding_windows",
    "welch_from_params",
    "welch_psd",
    "window_length",
    "window_starts",
]
