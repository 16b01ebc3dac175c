"""
Heart-rate estimation utilities for facepulse.

This module provides the per-window Welch peak estimator and the assembly of
heart-rate series over the sliding-window grid.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..dsp.signals import Signal1D, Spectrum
from ..dsp.spectrum import welch_from_params
from ..dsp.windows import sliding_windows
from ..rppg.base import PulseWindow
from ..utils.exceptions import EmptySeriesError, InvalidInputError
from ..utils.logging import get_logger
from ..utils.schemas import SpectralConfig

logger = get_logger()

BPM_MIN = 45.0
BPM_MAX = 240.0


@dataclass(frozen=True)
class HrSeries:
    """Heart-rate estimates on the sliding-window grid.

    Attributes:
        times: Window start times in seconds (uniform step)
        bpm: Estimates; invalid windows carry the previous valid value (NaN if none)
        valid: True where the window produced its own estimate
    """

    times: np.ndarray
    bpm: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        bpm = np.asarray(self.bpm, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if not (times.shape == bpm.shape == valid.shape) or times.ndim != 1:
            raise InvalidInputError("HrSeries arrays must be 1-D and equally long")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidInputError("HrSeries times must be strictly increasing")
        for arr in (times, bpm, valid):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "bpm", bpm)
        object.__setattr__(self, "valid", valid)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def step_s(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    @property
    def valid_fraction(self) -> float:
        return float(self.valid.mean()) if len(self) else 0.0

    def with_validity(self, valid: np.ndarray) -> "HrSeries":
        """Copy with additional windows invalidated and refilled."""
        merged = self.valid & np.asarray(valid, dtype=bool)
        estimates = [b if ok else None for b, ok in zip(self.bpm, merged)]
        return series_from_estimates(self.times, estimates)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time_s": self.times, "bpm": self.bpm, "valid": self.valid})


def _parabolic_offset(left: float, centre: float, right: float) -> float:
    denom = left - 2.0 * centre + right
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def peak_frequency(spectrum: Spectrum, band) -> Optional[float]:
    """Refined in-band peak frequency of a spectrum.

    Returns None when the band holds no bin or the in-band maximum sits on a
    band edge without being a local peak of the full spectrum.
    """
    mask = spectrum.band_mask(band)
    if not mask.any():
        return None
    idx = np.flatnonzero(mask)
    k = int(idx[np.argmax(spectrum.power[idx])])
    p = spectrum.power
    if p[k] <= 0:
        return None

    if k == idx[0] or k == idx[-1]:
        left = p[k - 1] if k > 0 else -np.inf
        right = p[k + 1] if k + 1 < p.size else -np.inf
        if not (p[k] >= left and p[k] >= right):
            return None

    offset = 0.0
    if 0 < k < p.size - 1:
        offset = _parabolic_offset(p[k - 1], p[k], p[k + 1])
    freq = spectrum.freqs[k] + offset * spectrum.df
    return float(np.clip(freq, band[0], band[1]))


def estimate_hr(
    window: Union[PulseWindow, Signal1D], cfg: Optional[SpectralConfig] = None
) -> Optional[float]:
    """Estimate the heart rate of one window.

    The Welch PSD is restricted to the pulse band and its peak refined by
    three-point parabolic interpolation.

    Args:
        window: Pulse window (or plain signal)
        cfg: Spectral settings (defaults when None)

    Returns:
        Heart rate in bpm, or None for a flat window or one without an in-band peak
    """
    cfg = cfg or SpectralConfig()
    if isinstance(window, PulseWindow):
        if window.flat:
            return None
        signal = window.as_signal()
    else:
        signal = window
    if len(signal) < 2 or np.ptp(signal.samples) == 0:
        return None

    freq = peak_frequency(welch_from_params(signal, cfg.welch), cfg.band)
    if freq is None:
        return None
    return 60.0 * freq


def series_from_estimates(
    times: Sequence[float], estimates: Sequence[Optional[float]]
) -> HrSeries:
    """Build an HrSeries, filling invalid windows with the previous valid value.

    Leading invalid windows take the first valid value.
    """
    raw = np.array([np.nan if e is None else float(e) for e in estimates], dtype=np.float64)
    valid = ~np.isnan(raw)
    filled = pd.Series(raw).ffill().bfill().to_numpy()
    return HrSeries(np.asarray(times, dtype=np.float64), filled, valid)


def hr_series(
    signal: Signal1D,
    cfg: Optional[SpectralConfig] = None,
    window_valid: Optional[np.ndarray] = None,
) -> HrSeries:
    """Estimate the heart rate over every sliding window of a signal.

    Args:
        signal: Pulse signal
        cfg: Spectral settings (defaults when None)
        window_valid: Optional per-window mask; False windows are treated as invalid

    Returns:
        HrSeries on the window grid

    Raises:
        EmptySeriesError: If the signal is shorter than one window
    """
    cfg = cfg or SpectralConfig()
    windows = sliding_windows(signal, cfg.win_s, cfg.step_s)
    if not windows:
        raise EmptySeriesError(
            f"Signal of {signal.duration_s:.2f} s is shorter than the {cfg.win_s} s window"
        )
    if window_valid is not None and len(window_valid) != len(windows):
        raise InvalidInputError(
            f"Window mask has {len(window_valid)} entries for {len(windows)} windows"
        )

    estimates: List[Optional[float]] = []
    for k, (_, win) in enumerate(windows):
        if window_valid is not None and not window_valid[k]:
            estimates.append(None)
        else:
            estimates.append(estimate_hr(win, cfg))

    series = series_from_estimates([t for t, _ in windows], estimates)
    n_invalid = int((~series.valid).sum())
    if n_invalid:
        logger.debug(f"{n_invalid}/{len(series)} windows without a valid estimate")
    return series
