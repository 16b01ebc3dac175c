"""
Reference heart-rate utilities for facepulse.

This module provides the heart-rate series of reference signals: contact BVP
through the same spectral path as extracted signals, and ECG through R-peak
detection. It also masks flatline gaps in references.
"""

from fractions import Fraction
from typing import Literal, Optional

import numpy as np
from scipy import signal as sps

from ..dsp.filters import check_band
from ..dsp.signals import Signal1D
from ..dsp.windows import window_length, window_starts
from ..utils.exceptions import EmptySeriesError, InvalidInputError
from ..utils.logging import get_logger
from ..utils.schemas import ReferenceConfig, SpectralConfig
from .heartrate import BPM_MAX, BPM_MIN, HrSeries, hr_series, series_from_estimates

logger = get_logger()

ReferenceKind = Literal["bvp", "ecg"]

# ECG detector stages
QRS_BAND_HZ = (5.0, 15.0)
INTEGRATION_S = 0.15
REFRACTORY_S = 60.0 / BPM_MAX
REFINE_S = 0.075
THRESHOLD_FRAC = 0.3


def mask_reference_gaps(reference: Signal1D, cfg: Optional[ReferenceConfig] = None) -> np.ndarray:
    """Mark samples inside flatline runs as invalid.

    A run of successive absolute differences below ``flat_eps_rel`` times the
    signal's range, lasting longer than ``min_gap_s``, is a gap.

    Returns:
        Boolean mask, True for valid samples
    """
    cfg = cfg or ReferenceConfig()
    x = reference.samples
    n = x.size
    valid = np.ones(n, dtype=bool)
    if n < 2:
        return valid

    eps = cfg.flat_eps_rel * float(np.ptp(x))
    still = np.abs(np.diff(x)) <= eps

    # Run boundaries of consecutive "still" steps
    padded = np.concatenate(([False], still, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    for start, stop in zip(edges[::2], edges[1::2]):
        if (stop - start) / reference.fs > cfg.min_gap_s:
            valid[start : stop + 1] = False
    return valid


def window_validity(
    sample_valid: np.ndarray, fs: float, spectral: SpectralConfig, max_invalid_frac: float
) -> np.ndarray:
    """Per-window validity: a window is invalid when more than the given share of samples is."""
    length = window_length(fs, spectral.win_s)
    starts = window_starts(sample_valid.size, fs, spectral.win_s, spectral.step_s)
    invalid = ~np.asarray(sample_valid, dtype=bool)
    csum = np.concatenate(([0], np.cumsum(invalid)))
    fractions = (csum[starts + length] - csum[starts]) / length
    return fractions <= max_invalid_frac


def resample_to(signal: Signal1D, target_fs: float) -> Signal1D:
    """Polyphase resampling to a target rate."""
    if target_fs == signal.fs:
        return signal
    ratio = Fraction(target_fs / signal.fs).limit_denominator(1000)
    y = sps.resample_poly(signal.samples, ratio.numerator, ratio.denominator)
    return Signal1D(y, target_fs)


def _resample_mask(mask: np.ndarray, fs: float, target_fs: float, n_out: int) -> np.ndarray:
    idx = np.minimum((np.arange(n_out) * fs / target_fs).astype(int), mask.size - 1)
    return mask[idx]


def detect_r_peaks(ecg: Signal1D) -> np.ndarray:
    """Locate R peaks in an ECG trace.

    Band-limited derivative, squaring and moving-window integration, then peaks
    above an adaptive threshold with a refractory distance, refined to the
    largest band-passed deflection nearby.

    Returns:
        Peak sample indices (sorted)

    Raises:
        InvalidBandError: If the sampling rate cannot hold the QRS band
    """
    fs = ecg.fs
    check_band(QRS_BAND_HZ[0], QRS_BAND_HZ[1], fs)
    sos = sps.butter(3, QRS_BAND_HZ, btype="bandpass", fs=fs, output="sos")
    filtered = sps.sosfiltfilt(sos, ecg.samples - ecg.samples.mean())

    energy = np.gradient(filtered) ** 2
    width = max(int(round(INTEGRATION_S * fs)), 1)
    integrated = np.convolve(energy, np.ones(width) / width, mode="same")
    if not np.any(integrated > 0):
        return np.zeros(0, dtype=int)

    threshold = THRESHOLD_FRAC * float(np.percentile(integrated, 99))
    candidates, _ = sps.find_peaks(
        integrated, height=threshold, distance=max(int(round(REFRACTORY_S * fs)), 1)
    )

    half = max(int(round(REFINE_S * fs)), 1)
    magnitude = np.abs(filtered)
    peaks = []
    for c in candidates:
        lo, hi = max(c - half, 0), min(c + half + 1, magnitude.size)
        peaks.append(lo + int(np.argmax(magnitude[lo:hi])))
    return np.unique(np.asarray(peaks, dtype=int))


def ecg_hr_series(
    ecg: Signal1D,
    cfg: SpectralConfig,
    sample_valid: Optional[np.ndarray] = None,
    max_invalid_frac: float = 0.2,
) -> HrSeries:
    """Per-window mean heart rate from RR intervals of detected R peaks.

    Each RR interval is attributed to the window holding its closing beat.
    Windows with fewer than two beats or a rate outside 45-240 bpm are invalid.
    """
    length = window_length(ecg.fs, cfg.win_s)
    starts = window_starts(len(ecg), ecg.fs, cfg.win_s, cfg.step_s)
    if starts.size == 0:
        raise EmptySeriesError(
            f"ECG of {ecg.duration_s:.2f} s is shorter than the {cfg.win_s} s window"
        )
    valid_windows = (
        window_validity(sample_valid, ecg.fs, cfg, max_invalid_frac)
        if sample_valid is not None
        else np.ones(starts.size, dtype=bool)
    )

    peaks = detect_r_peaks(ecg)
    logger.debug(f"Detected {peaks.size} R peaks in {ecg.duration_s:.1f} s of ECG")
    rr = np.diff(peaks) / ecg.fs
    closing = peaks[1:]

    estimates = []
    for k, start in enumerate(starts):
        inside = (closing >= start) & (closing < start + length) & (peaks[:-1] >= start)
        if not valid_windows[k] or inside.sum() < 1:
            estimates.append(None)
            continue
        bpm = 60.0 / float(rr[inside].mean())
        estimates.append(bpm if BPM_MIN <= bpm <= BPM_MAX else None)
    return series_from_estimates(np.arange(starts.size) * cfg.step_s, estimates)


def reference_hr(
    reference: Signal1D,
    kind: ReferenceKind = "bvp",
    cfg: Optional[SpectralConfig] = None,
    ref_cfg: Optional[ReferenceConfig] = None,
    target_fs: Optional[float] = None,
) -> HrSeries:
    """Heart-rate series of a reference signal.

    BVP references go through exactly the path of extracted signals
    (``hr_series``) after optional resampling to ``target_fs``; windows with
    too many gap samples are invalidated. ECG references use R-peak detection
    at their native rate.

    Args:
        reference: Reference signal at its native rate
        kind: "bvp" or "ecg"
        cfg: Spectral settings
        ref_cfg: Gap-masking settings
        target_fs: Common rate for BVP references (usually the video frame rate)

    Returns:
        HrSeries on the shared window grid

    Raises:
        EmptySeriesError: If the reference is shorter than one window
        InvalidInputError: If the kind is unknown
    """
    cfg = cfg or SpectralConfig()
    ref_cfg = ref_cfg or ReferenceConfig()
    sample_valid = mask_reference_gaps(reference, ref_cfg)
    if not sample_valid.all():
        logger.info(
            f"Reference has {int((~sample_valid).sum())} samples inside flatline gaps"
        )

    if kind == "ecg":
        return ecg_hr_series(reference, cfg, sample_valid, ref_cfg.max_invalid_frac)
    if kind != "bvp":
        raise InvalidInputError(f"Unknown reference kind: {kind}")

    signal = reference
    if target_fs is not None and target_fs != reference.fs:
        signal = resample_to(reference, target_fs)
        sample_valid = _resample_mask(sample_valid, reference.fs, target_fs, len(signal))

    if sample_valid.all():
        return hr_series(signal, cfg)
    windows_ok = window_validity(sample_valid, signal.fs, cfg, ref_cfg.max_invalid_frac)
    return hr_series(signal, cfg, window_valid=windows_ok)
