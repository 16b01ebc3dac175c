"""
Spectral estimation utilities for facepulse.

This module provides Welch power-spectral-density estimation with the
defaults used for 10 s heart-rate windows.
"""

from typing import Optional

from scipy import signal as sps

from ..utils.exceptions import InvalidInputError
from ..utils.schemas import WelchParams
from .signals import Signal1D, Spectrum


def _next_pow2(n: int) -> int:
    return 1 << (max(int(n), 1) - 1).bit_length()


def welch_psd(
    signal: Signal1D,
    seg_len: Optional[int] = None,
    overlap_frac: float = 0.5,
    nfft: Optional[int] = None,
) -> Spectrum:
    """Estimate the one-sided PSD with Hann-windowed Welch averaging.

    Args:
        signal: Input signal
        seg_len: Segment length (default min(N, 256))
        overlap_frac: Fraction of overlap between segments, in [0, 1)
        nfft: FFT length (default next power of two >= max(1024, N))

    Returns:
        Spectrum on [0, fs/2] scaled as a density (sum(power) * df ~ variance)

    Raises:
        InvalidInputError: If the parameters violate their preconditions
    """
    n = len(signal)
    if n < 2:
        raise InvalidInputError("Welch estimation needs at least 2 samples")
    seg_len = min(n, 256) if seg_len is None else int(seg_len)
    nfft = _next_pow2(max(1024, n)) if nfft is None else int(nfft)

    if not 2 <= seg_len <= n:
        raise InvalidInputError(f"seg_len must be within [2, {n}], got {seg_len}")
    if not 0 <= overlap_frac < 1:
        raise InvalidInputError(f"overlap_frac must be within [0, 1), got {overlap_frac}")
    if nfft < seg_len:
        raise InvalidInputError(f"nfft ({nfft}) must be >= seg_len ({seg_len})")

    noverlap = min(int(round(overlap_frac * seg_len)), seg_len - 1)
    freqs, power = sps.welch(
        signal.samples,
        fs=signal.fs,
        window="hann",
        nperseg=seg_len,
        noverlap=noverlap,
        nfft=nfft,
        detrend="constant",
        scaling="density",
    )
    # Round-off can leave tiny negative values
    return Spectrum(freqs, power.clip(min=0.0))


def welch_from_params(signal: Signal1D, params: WelchParams) -> Spectrum:
    """Welch PSD using a configured parameter set (segment length capped at the signal length)."""
    seg_len = None if params.seg_len is None else min(params.seg_len, len(signal))
    return welch_psd(
        signal, seg_len=seg_len, overlap_frac=params.overlap_frac, nfft=params.nfft
    )
