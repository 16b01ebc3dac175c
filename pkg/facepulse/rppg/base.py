"""
Core types for RGB-to-pulse conversion in facepulse.

This module provides the trace-matrix input, the pulse-window output and the
helpers shared by the conversion methods.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Tuple

import numpy as np

from ..dsp.signals import Signal1D
from ..dsp.spectrum import welch_psd
from ..utils.exceptions import DegenerateTraceError, InvalidInputError

MIN_SAMPLES = 32
FLAT_REL = 1e-12
FLAT_ABS = 1e-20


@dataclass(frozen=True)
class TraceMatrix:
    """Mean RGB traces of one window.

    Attributes:
        C: 3 x N matrix with rows R, G, B
        fs: Sampling rate in Hz
    """

    C: np.ndarray
    fs: float

    def __post_init__(self):
        c = np.array(self.C, dtype=np.float64, copy=True)
        if c.ndim != 2 or c.shape[0] != 3:
            raise InvalidInputError(f"Trace matrix must be 3 x N, got {c.shape}")
        if c.shape[1] < MIN_SAMPLES:
            raise InvalidInputError(
                f"Trace matrix needs at least {MIN_SAMPLES} samples, got {c.shape[1]}"
            )
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("Trace matrix contains NaN or Inf")
        if not (math.isfinite(self.fs) and self.fs > 0):
            raise InvalidInputError(f"Invalid sampling rate {self.fs}")
        c.setflags(write=False)
        object.__setattr__(self, "C", c)

    @property
    def n(self) -> int:
        return int(self.C.shape[1])

    def normalized(self) -> np.ndarray:
        """Each row divided by its temporal mean.

        Raises:
            DegenerateTraceError: If a row has zero mean
        """
        means = self.C.mean(axis=1, keepdims=True)
        if np.any(means == 0):
            raise DegenerateTraceError("Cannot mean-normalize a zero-mean channel")
        return self.C / means

    def centered(self) -> np.ndarray:
        return self.C - self.C.mean(axis=1, keepdims=True)


@dataclass(frozen=True)
class PulseWindow:
    """Pulse signal produced by one method over one window.

    Attributes:
        samples: Zero-mean pulse samples
        fs: Sampling rate in Hz
        method: Registry key of the method
        flat: True when the output carries no usable signal
        flags: Method-specific notes (e.g. "pbv_ridge", "mean_normalized")
    """

    samples: np.ndarray
    fs: float
    method: str
    flat: bool = False
    flags: Tuple[str, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return int(self.samples.size)

    def as_signal(self) -> Signal1D:
        return Signal1D(self.samples, self.fs)


def finalize(
    samples: np.ndarray,
    input_var: float,
    fs: float,
    method: str,
    flags: Iterable[str] = (),
) -> PulseWindow:
    """Remove the mean and apply the flat-signal rule.

    The output is flat when its variance is at most 1e-12 of the input
    variance (or numerically zero).
    """
    y = np.asarray(samples, dtype=np.float64)
    y = y - y.mean()
    out_var = float(y.var())
    flat = out_var <= max(FLAT_REL * input_var, FLAT_ABS)
    y.setflags(write=False)
    return PulseWindow(y, fs, method, flat, tuple(flags))


def peak_ratio(samples: np.ndarray, fs: float, band: Tuple[float, float]) -> float:
    """In-band spectral peak power over total in-band power (0 for silent input)."""
    x = np.asarray(samples, dtype=np.float64)
    if np.ptp(x) == 0:
        return 0.0
    spectrum = welch_psd(Signal1D(x, fs))
    power = spectrum.power[spectrum.band_mask(band)]
    total = power.sum()
    return float(power.max() / total) if total > 0 else 0.0


def select_component(
    components: np.ndarray, fs: float, band: Tuple[float, float], reference: np.ndarray
) -> Tuple[np.ndarray, int]:
    """Pick the component with the highest in-band peak ratio and fix its sign.

    Components with negligible variance are skipped. The sign is chosen so the
    output correlates positively with ``reference`` (the green channel).

    Returns:
        Tuple of (selected component, its index)
    """
    variances = components.var(axis=1)
    usable = variances > FLAT_REL * max(float(variances.max()), FLAT_ABS)
    scores = [
        peak_ratio(comp, fs, band) if ok else -1.0 for comp, ok in zip(components, usable)
    ]
    best = int(np.argmax(scores))
    chosen = components[best]
    ref = reference - reference.mean()
    if float(np.dot(chosen - chosen.mean(), ref)) < 0:
        chosen = -chosen
    return chosen, best
