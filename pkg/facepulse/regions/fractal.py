"""
Fractal time-series measures for facepulse.

This module provides the Katz fractal dimension and the detrended
fluctuation analysis exponent used to screen candidate regions.
"""

import numpy as np

from ..utils.exceptions import InvalidInputError, UndefinedKfdError

DFA_MIN_LENGTH = 64
DFA_MIN_BOX = 4
DFA_SCALES = 10


def katz_fd(series) -> float:
    """Katz fractal dimension of a waveform.

    The waveform is treated as a polyline with unit x-steps:
    D = log10(n) / (log10(d / L) + log10(n)), with L the total length,
    a the mean step length, n = L / a and d the largest distance from the
    first point.

    Args:
        series: Real sequence of length >= 3

    Returns:
        D_KFD (>= 1 for non-constant input)

    Raises:
        InvalidInputError: If the series has fewer than 3 samples
        UndefinedKfdError: If the series is constant
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise InvalidInputError("katz_fd needs a 1-D series of at least 3 samples")
    if np.ptp(y) == 0:
        raise UndefinedKfdError("Katz fractal dimension is undefined for a constant series")

    steps = np.hypot(1.0, np.diff(y))
    length = steps.sum()
    n = length / steps.mean()
    offsets = np.arange(y.size, dtype=np.float64)
    d = np.max(np.hypot(offsets, y - y[0]))

    denom = np.log10(d / length) + np.log10(n)
    if denom <= 0:
        raise UndefinedKfdError("Katz fractal dimension is undefined for this series")
    return float(np.log10(n) / denom)


def dfa_scales(n_samples: int) -> np.ndarray:
    """Log-spaced integer box sizes in [4, N/4] (duplicates removed)."""
    max_box = n_samples // 4
    raw = np.logspace(np.log10(DFA_MIN_BOX), np.log10(max_box), DFA_SCALES)
    return np.unique(np.floor(raw).astype(int))


def dfa_alpha(series) -> float:
    """Detrended fluctuation analysis exponent.

    The mean-removed series is integrated; for each box size n the profile is
    cut into non-overlapping boxes, a line is fitted per box and F(n) is the
    RMS of the residuals. Alpha is the least-squares slope of log F against
    log n.

    Args:
        series: Real sequence of length >= 64

    Returns:
        alpha (about 0.5 for white noise, 1.5 for a random walk); NaN when
        the fluctuation vanishes at some scale (constant or piecewise-linear input)

    Raises:
        InvalidInputError: If the series is shorter than 64 samples
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < DFA_MIN_LENGTH:
        raise InvalidInputError(f"dfa_alpha needs at least {DFA_MIN_LENGTH} samples")

    profile = np.cumsum(x - x.mean())
    scales = dfa_scales(x.size)
    fluctuations = []
    for n in scales:
        n_boxes = x.size // n
        boxes = profile[: n_boxes * n].reshape(n_boxes, n)
        t = np.arange(n, dtype=np.float64)
        slope, intercept = np.polyfit(t, boxes.T, 1)
        trend = slope[:, None] * t[None, :] + intercept[:, None]
        fluctuations.append(np.sqrt(np.mean((boxes - trend) ** 2)))

    fluct = np.asarray(fluctuations)
    if np.any(fluct <= 0):
        return float("nan")
    alpha, _ = np.polyfit(np.log(scales), np.log(fluct), 1)
    return float(alpha)
