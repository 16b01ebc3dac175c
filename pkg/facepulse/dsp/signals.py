"""
Signal containers for facepulse.

This module provides the immutable one-dimensional signal and spectrum types
shared by every processing stage.
"""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..utils.exceptions import InvalidInputError


def _as_readonly(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal1D:
    """A uniformly sampled real signal.

    Attributes:
        samples: Signal values (float64, read-only)
        fs: Sampling rate in Hz
    """

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = _as_readonly(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("Signal samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("Signal samples must be finite")
        if not (math.isfinite(self.fs) and self.fs > 0):
            raise InvalidInputError(f"Sampling rate must be finite and positive, got {self.fs}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs

    def with_samples(self, samples) -> "Signal1D":
        """Return a new signal at the same rate with different samples."""
        return Signal1D(samples, self.fs)


@dataclass(frozen=True)
class Spectrum:
    """A one-sided power spectral density.

    Attributes:
        freqs: Strictly increasing frequency grid in Hz
        power: Non-negative densities, one per frequency
    """

    freqs: np.ndarray
    power: np.ndarray
    df: float = field(init=False)

    def __post_init__(self):
        freqs = _as_readonly(self.freqs)
        power = _as_readonly(self.power)
        if freqs.ndim != 1 or freqs.shape != power.shape or freqs.size < 2:
            raise InvalidInputError("Spectrum needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(freqs) <= 0):
            raise InvalidInputError("Spectrum frequencies must be strictly increasing")
        if np.any(power < 0):
            raise InvalidInputError("Spectrum power must be non-negative")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "df", float(freqs[1] - freqs[0]))

    def band_mask(self, band: Tuple[float, float]) -> np.ndarray:
        """Boolean mask of the bins inside the closed band [low, high]."""
        low, high = band
        return (self.freqs >= low) & (self.freqs <= high)

    def band_power(self, band: Tuple[float, float]) -> float:
        """Integrated power over the band (rectangle rule)."""
        return float(np.sum(self.power[self.band_mask(band)]) * self.df)

    def total_power(self) -> float:
        return float(np.sum(self.power) * self.df)
