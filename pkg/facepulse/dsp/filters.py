"""
Filtering utilities for facepulse.

This module provides detrending, Kaiser-window FIR band-pass filtering and
moving-average smoothing of one-dimensional signals.
"""

from typing import Literal

import numpy as np
from scipy import signal as sps
from scipy import sparse
from scipy.sparse.linalg import spsolve

from ..utils.exceptions import InvalidBandError, InvalidInputError
from ..utils.schemas import BandpassSpec
from .signals import Signal1D

DetrendMethod = Literal["linear", "smoothness_priors"]


def detrend(
    signal: Signal1D, method: DetrendMethod = "linear", lam: float = 300.0
) -> Signal1D:
    """Remove a slow trend from a signal.

    Args:
        signal: Input signal (at least 3 samples)
        method: "linear" (least-squares line) or "smoothness_priors"
        lam: Regularisation parameter of the smoothness-priors detrender

    Returns:
        Detrended signal with the same length and rate

    Raises:
        InvalidInputError: If the signal is too short or the method is unknown
    """
    x = signal.samples
    n = x.size
    if n < 3:
        raise InvalidInputError(f"detrend needs at least 3 samples, got {n}")
    if np.ptp(x) == 0:
        return signal.with_samples(np.zeros(n))

    if method == "linear":
        return signal.with_samples(sps.detrend(x, type="linear"))

    if method == "smoothness_priors":
        # Second-order difference operator, (n-2) x n
        ones = np.ones(n - 2)
        d2 = sparse.diags([ones, -2 * ones, ones], [0, 1, 2], shape=(n - 2, n), format="csc")
        system = sparse.identity(n, format="csc") + (lam**2) * (d2.T @ d2)
        trend = spsolve(system.tocsc(), x)
        return signal.with_samples(x - trend)

    raise InvalidInputError(f"Unknown detrend method: {method}")


def check_band(low_hz: float, high_hz: float, fs: float) -> None:
    """Validate a pass band against the Nyquist rate.

    Raises:
        InvalidBandError: If the band does not satisfy 0 < low < high < fs/2
    """
    if not 0 < low_hz < high_hz < fs / 2:
        raise InvalidBandError(
            f"Band {low_hz}-{high_hz} Hz is not inside (0, {fs / 2}) Hz for fs={fs}"
        )


def design_bandpass(spec: BandpassSpec, fs: float) -> np.ndarray:
    """Design the linear-phase Kaiser-window band-pass FIR taps.

    Args:
        spec: Band edges, Kaiser beta and optional tap count
        fs: Sampling rate in Hz

    Returns:
        Filter taps (odd length, symmetric)

    Raises:
        InvalidBandError: If the band is outside the Nyquist range
    """
    check_band(spec.low_hz, spec.high_hz, fs)
    num_taps = spec.taps_for(fs)
    return sps.firwin(
        num_taps,
        [spec.low_hz, spec.high_hz],
        window=("kaiser", spec.beta),
        pass_zero=False,
        fs=fs,
    )


def bandpass_fir(signal: Signal1D, spec: BandpassSpec) -> Signal1D:
    """Zero-phase band-pass filter a signal.

    The mean is removed first and the designed FIR is applied forward and
    backward, so the magnitude response is squared and the phase is zero.

    Args:
        signal: Input signal
        spec: Filter specification

    Returns:
        Filtered signal with the same length and rate

    Raises:
        InvalidBandError: If the band is outside the Nyquist range
        InvalidInputError: If the signal is shorter than the filter
    """
    taps = design_bandpass(spec, signal.fs)
    n = len(signal)
    if n < taps.size:
        raise InvalidInputError(
            f"Signal of {n} samples is shorter than the {taps.size}-tap filter"
        )

    if np.ptp(signal.samples) == 0:
        return signal.with_samples(np.zeros(n))
    x = signal.samples - signal.samples.mean()
    padlen = min(3 * taps.size, n - 1)
    y = sps.filtfilt(taps, [1.0], x, padlen=padlen)
    return signal.with_samples(y)


def moving_average(signal: Signal1D, width: int) -> Signal1D:
    """Centered moving average; the window shrinks at the edges.

    Args:
        signal: Input signal
        width: Window width in samples (1 <= width <= length)

    Returns:
        Smoothed signal with the same length and rate

    Raises:
        InvalidInputError: If the width is out of range
    """
    n = len(signal)
    if width < 1 or width > n:
        raise InvalidInputError(f"Moving-average width must be in [1, {n}], got {width}")
    if width == 1:
        return signal.with_samples(signal.samples)

    left = (width - 1) // 2
    right = width // 2
    idx = np.arange(n)
    lo = np.clip(idx - left, 0, n)
    hi = np.clip(idx + right + 1, 0, n)
    csum = np.concatenate(([0.0], np.cumsum(signal.samples)))
    return signal.with_samples((csum[hi] - csum[lo]) / (hi - lo))
