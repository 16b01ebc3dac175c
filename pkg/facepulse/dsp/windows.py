"""
Windowing utilities for facepulse.

This module provides the sliding-window grid shared by heart-rate estimation,
region selection and the extraction pipelines.
"""

from typing import List, Tuple

import numpy as np

from ..utils.exceptions import InvalidInputError
from .signals import Signal1D


def window_length(fs: float, win_s: float) -> int:
    """Number of samples in a window of ``win_s`` seconds."""
    return int(round(win_s * fs))


def window_starts(n_samples: int, fs: float, win_s: float, step_s: float) -> np.ndarray:
    """Start indices of every complete window over ``n_samples`` samples.

    Window k starts at round(k * step_s * fs); partial trailing windows are dropped.

    Raises:
        InvalidInputError: If the window is shorter than 2 samples or the step is not positive
    """
    length = window_length(fs, win_s)
    if length < 2:
        raise InvalidInputError(f"Window of {win_s} s at {fs} Hz has fewer than 2 samples")
    if step_s <= 0:
        raise InvalidInputError(f"Window step must be positive, got {step_s}")
    if n_samples < length:
        return np.zeros(0, dtype=int)

    # Upper bound on k; the exact cut is applied after rounding
    k_max = int(np.floor((n_samples - length) / (step_s * fs) + 1e-9)) + 1
    starts = np.round(np.arange(k_max + 1) * step_s * fs).astype(int)
    return starts[starts + length <= n_samples]


def sliding_windows(
    signal: Signal1D, win_s: float, step_s: float
) -> List[Tuple[float, Signal1D]]:
    """Cut a signal into overlapping windows.

    Args:
        signal: Input signal
        win_s: Window length in seconds
        step_s: Step between window starts in seconds

    Returns:
        List of (start_time_s, window) pairs; empty if the signal is shorter than a window
    """
    length = window_length(signal.fs, win_s)
    starts = window_starts(len(signal), signal.fs, win_s, step_s)
    return [
        (k * step_s, signal.with_samples(signal.samples[s : s + length]))
        for k, s in enumerate(starts)
    ]
