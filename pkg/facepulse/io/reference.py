"""
Reference signal utilities for facepulse.

This module provides the reader and writer of reference CSV files (contact
BVP or ECG), with resampling of timestamped data to a uniform rate.
"""

from pathlib import Path
from typing import Literal, Optional

import numpy as np
import pandas as pd

from ..dsp.signals import Signal1D
from ..utils.exceptions import InvalidInputError, ReferenceFormatError
from ..utils.logging import get_logger

logger = get_logger()

ReferenceKind = Literal["bvp", "ecg"]

TIME_COLUMN = "t"
VALUE_COLUMN = "value"
UNIFORM_TOL = 1e-6


def _read_table(path: str) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ReferenceFormatError(f"Could not parse reference file {path}: {e}") from e
    if df.empty:
        raise ReferenceFormatError(f"Reference file {path} has no samples")

    # A bare numeric first line means the file has no header
    first = str(df.columns[0]).strip()
    try:
        float(first)
    except ValueError:
        df.columns = [str(c).strip() for c in df.columns]
        return df
    df = pd.read_csv(path, header=None)
    if df.shape[1] == 1:
        df.columns = [VALUE_COLUMN]
    else:
        df.columns = [TIME_COLUMN] + [f"ch{i}" for i in range(df.shape[1] - 1)]
    return df


def _value_column(df: pd.DataFrame, path: str, channel: Optional[int]) -> str:
    candidates = [c for c in df.columns if c != TIME_COLUMN]
    if not candidates:
        raise ReferenceFormatError(f"{path}: no value column")
    if channel is not None:
        if channel >= len(candidates):
            raise ReferenceFormatError(
                f"{path}: channel {channel} requested but only {len(candidates)} present"
            )
        return candidates[channel]
    if VALUE_COLUMN in candidates:
        return VALUE_COLUMN
    if len(candidates) > 1:
        raise ReferenceFormatError(
            f"{path}: {len(candidates)} value columns; select one with a channel index"
        )
    return candidates[0]


def resample_uniform(times: np.ndarray, values: np.ndarray, fs: float) -> np.ndarray:
    """Linearly interpolate timestamped samples onto t0 + k / fs.

    Raises:
        ReferenceFormatError: If timestamps are duplicated or not increasing
    """
    steps = np.diff(times)
    if np.any(steps == 0):
        k = int(np.flatnonzero(steps == 0)[0]) + 1
        raise ReferenceFormatError(f"Duplicate timestamp {times[k]} at sample {k}")
    if np.any(steps < 0):
        k = int(np.flatnonzero(steps < 0)[0]) + 1
        raise ReferenceFormatError(f"Timestamps decrease at sample {k} ({times[k]})")

    if np.all(np.abs(steps - 1.0 / fs) <= UNIFORM_TOL):
        return values
    n = int(np.floor((times[-1] - times[0]) * fs + 1e-9)) + 1
    grid = times[0] + np.arange(n) / fs
    logger.debug(f"Resampled {times.size} timestamped samples to {n} at {fs} Hz")
    return np.interp(grid, times, values)


def load_reference(
    path: str, kind: ReferenceKind = "bvp", fs: float = 60.0, channel: Optional[int] = None
) -> Signal1D:
    """Read a reference signal.

    Accepted layouts: a ``t,value`` CSV (timestamps in seconds), a
    ``value``-only CSV at the declared rate, or headerless columns. Multi-lead
    files select a column with ``channel``.

    Args:
        path: CSV file path
        kind: "bvp" or "ecg" (informational; both load the same way)
        fs: Declared sampling rate in Hz
        channel: Index among the value columns

    Returns:
        Uniformly sampled Signal1D at ``fs``

    Raises:
        ReferenceFormatError: If the file is unreadable, holds non-numeric
            values or has duplicate or decreasing timestamps
    """
    if not fs > 0:
        raise InvalidInputError(f"Reference rate must be positive, got {fs}")
    if not Path(path).is_file():
        raise ReferenceFormatError(f"Reference file not found: {path}")

    df = _read_table(path)
    column = _value_column(df, path, channel)
    try:
        values = df[column].astype(np.float64).to_numpy()
        times = df[TIME_COLUMN].astype(np.float64).to_numpy() if TIME_COLUMN in df else None
    except (TypeError, ValueError) as e:
        raise ReferenceFormatError(f"{path}: non-numeric samples ({e})") from e
    if not np.all(np.isfinite(values)) or (times is not None and not np.all(np.isfinite(times))):
        raise ReferenceFormatError(f"{path}: missing or non-finite samples")

    if times is not None and times.size > 1:
        values = resample_uniform(times, values, fs)
    logger.debug(f"Loaded {kind} reference {path}: {values.size} samples at {fs} Hz")
    return Signal1D(values, fs)


def write_reference(signal: Signal1D, path: str, with_time: bool = True) -> str:
    """Write a reference signal as ``t,value`` (or ``value``-only) CSV."""
    data = {VALUE_COLUMN: signal.samples}
    if with_time:
        data = {TIME_COLUMN: np.arange(len(signal)) / signal.fs, **data}
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(data).to_csv(path, index=False, float_format="%.9g")
    return path
