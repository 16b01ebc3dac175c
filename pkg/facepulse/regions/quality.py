"""
Region quality statistics for facepulse.

This module provides the per-region statistical and fractal battery used by
dynamic multi-region selection.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import pdist

from ..dsp.signals import Signal1D
from ..dsp.spectrum import welch_from_params
from ..utils.exceptions import InvalidInputError, UndefinedKfdError
from ..utils.schemas import WelchParams
from .fractal import DFA_MIN_LENGTH, dfa_alpha, katz_fd
from .grid import RgbTrace

ChannelMix = Literal["r", "g", "b"]

SNR_HALF_WIDTH_HZ = 0.2


@dataclass(frozen=True)
class RegionStats:
    """Quality record of one region over one window.

    ``kfd`` is None when the Katz dimension is undefined (constant series).
    """

    region_id: int
    mean: float
    std: float
    variance: float
    snr_db: float
    kfd: Optional[float]
    zero_crossings: int
    sample_entropy: float
    dfa_alpha: float
    psd_energy: float

    @property
    def kfd_defined(self) -> bool:
        return self.kfd is not None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def zero_crossings(series) -> int:
    """Sign changes of the mean-removed series (exact zeros skipped)."""
    x = np.asarray(series, dtype=np.float64)
    s = x - x.mean()
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(np.signbit(s[:-1]) != np.signbit(s[1:])))


def sample_entropy(series, m: int = 2, r_frac: float = 0.2) -> float:
    """Sample entropy with tolerance r = r_frac * std (Chebyshev distance).

    Returns:
        -ln(A / B), NaN when undefined (no matches or zero spread)
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    r = r_frac * x.std()
    if n <= m + 1 or r == 0:
        return float("nan")

    def matches(length: int) -> int:
        templates = sliding_window_view(x, length)[: n - m]
        return int(np.count_nonzero(pdist(templates, metric="chebyshev") <= r))

    b = matches(m)
    a = matches(m + 1)
    if a == 0 or b == 0:
        return float("nan")
    return float(-math.log(a / b))


def snr_db(spectrum, band: Tuple[float, float]) -> float:
    """Power within +-0.2 Hz of the in-band peak over the rest of the band, in dB."""
    in_band = spectrum.band_mask(band)
    if not in_band.any():
        return float("nan")
    power = np.where(in_band, spectrum.power, 0.0)
    peak = spectrum.freqs[int(np.argmax(power))]
    near = in_band & (np.abs(spectrum.freqs - peak) <= SNR_HALF_WIDTH_HZ)
    signal = spectrum.power[near].sum()
    noise = spectrum.power[in_band & ~near].sum()
    if signal <= 0:
        return float("nan")
    if noise <= 0:
        return float("inf")
    return float(10.0 * np.log10(signal / noise))


def compute_region_stats(
    trace: RgbTrace,
    channel_mix: ChannelMix = "g",
    band: Tuple[float, float] = (0.75, 4.0),
    welch: Optional[WelchParams] = None,
) -> RegionStats:
    """Compute the quality battery of a region trace.

    The trace is expected to be detrended and band-pass filtered already.
    Katz FD is evaluated on the z-normalised series so the record does not
    depend on the trace scale.

    Args:
        trace: Region RGB trace (>= 64 samples)
        channel_mix: Channel the statistics are computed on
        band: Pulse band in Hz
        welch: Welch parameters (defaults when None)

    Returns:
        RegionStats for the trace

    Raises:
        InvalidInputError: If the trace is shorter than 64 samples
    """
    x = np.asarray(trace.channel(channel_mix), dtype=np.float64)
    if x.size < DFA_MIN_LENGTH:
        raise InvalidInputError(
            f"Region {trace.region_id}: stats need {DFA_MIN_LENGTH} samples, got {x.size}"
        )

    std = float(x.std())
    variance = float(x.var())

    spectrum = welch_from_params(Signal1D(x, trace.fs), welch or WelchParams())
    energy = spectrum.band_power(band) if variance > 0 else 0.0

    kfd: Optional[float]
    if std > 0:
        try:
            kfd = katz_fd((x - x.mean()) / std)
        except UndefinedKfdError:
            kfd = None
        alpha = dfa_alpha(x)
    else:
        kfd = None
        alpha = float("nan")

    return RegionStats(
        region_id=trace.region_id,
        mean=float(x.mean()),
        std=std,
        variance=variance,
        snr_db=snr_db(spectrum, band) if variance > 0 else float("nan"),
        kfd=kfd,
        zero_crossings=zero_crossings(x),
        sample_entropy=sample_entropy(x),
        dfa_alpha=alpha,
        psd_energy=float(energy),
    )
