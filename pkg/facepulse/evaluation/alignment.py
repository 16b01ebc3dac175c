"""
Alignment utilities for facepulse.

This module provides the lag search between reference and extracted
heart-rate series and the pairing of their windows once a lag is applied.
"""

from dataclasses import dataclass
from typing import Dict, Literal, Sequence, Tuple

import numpy as np

from ..spectral.heartrate import HrSeries
from ..utils.exceptions import InvalidInputError, NoAlignmentError
from ..utils.logging import get_logger

logger = get_logger()

ScaleMode = Literal["none", "znorm"]

MIN_ENVELOPE_SD_BPM = 0.25
LAG_TIE_TOL = 0.02


@dataclass(frozen=True)
class AlignmentParams:
    """Time shift applied to the extracted series before comparison.

    Attributes:
        lag_s: Shift in seconds; a series delayed by d seconds is aligned with lag -d
        scale_mode: Dynamic-range alignment applied to the paired values
        max_lag_s: Search bound used to find the lag
        aligned: False when the lag search failed and zero lag was used instead
    """

    lag_s: float = 0.0
    scale_mode: ScaleMode = "none"
    max_lag_s: float = 3.0
    aligned: bool = True

    def __post_init__(self):
        if abs(self.lag_s) > self.max_lag_s + 1e-9:
            raise InvalidInputError(
                f"Lag {self.lag_s} s exceeds the search bound {self.max_lag_s} s"
            )


def _check_grid(ref: HrSeries, est: HrSeries) -> float:
    step = ref.step_s or est.step_s
    if len(ref) > 1 and len(est) > 1 and abs(ref.step_s - est.step_s) > 1e-9:
        raise InvalidInputError(
            f"Series are on different window grids ({ref.step_s} s vs {est.step_s} s)"
        )
    if step <= 0:
        raise InvalidInputError("Series need at least two windows to define a grid")
    return step


def _znorm(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else x - x.mean()


def paired_windows(
    ref: HrSeries, est: HrSeries, lag_steps: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pair reference window i with extracted window i + shift, shift = -lag_steps.

    Returns:
        Tuple of (reference bpm, extracted bpm, joint validity) over the overlap
    """
    shift = -lag_steps
    if shift >= 0:
        n = min(len(ref), len(est) - shift)
        r_idx = np.arange(max(n, 0))
        e_idx = r_idx + shift
    else:
        n = min(len(ref) + shift, len(est))
        e_idx = np.arange(max(n, 0))
        r_idx = e_idx - shift
    valid = ref.valid[r_idx] & est.valid[e_idx]
    return ref.bpm[r_idx], est.bpm[e_idx], valid


def apply_alignment(
    ref: HrSeries, est: HrSeries, align: AlignmentParams
) -> Tuple[np.ndarray, np.ndarray]:
    """Jointly valid (reference, extracted) values after applying the lag and scaling."""
    step = _check_grid(ref, est)
    r, e, valid = paired_windows(ref, est, int(round(align.lag_s / step)))
    r, e = r[valid], e[valid]
    if align.scale_mode == "znorm" and r.size:
        r, e = _znorm(r), _znorm(e)
    return r, e


def estimate_alignment(
    ref: HrSeries,
    est: HrSeries,
    max_lag_s: float = 3.0,
    min_common: int = 10,
    scale_mode: ScaleMode = "none",
    min_sd_bpm: float = MIN_ENVELOPE_SD_BPM,
    tie_tol: float = LAG_TIE_TOL,
) -> AlignmentParams:
    """Find the lag maximising the normalized cross-correlation of two series.

    Integer window steps within +-max_lag_s are searched; each candidate uses
    the z-normalized jointly valid windows. A candidate whose reference or
    extracted values spread less than ``min_sd_bpm`` carries no timing
    information and is skipped. Among the lags scoring within ``tie_tol`` of
    the best, the smallest |lag| wins. When every overlapping candidate is flat
    the envelopes agree at any shift and zero lag is returned.

    Args:
        ref: Reference heart-rate series
        est: Extracted heart-rate series on the same grid
        max_lag_s: Search bound in seconds
        min_common: Minimum jointly valid windows for a candidate lag
        scale_mode: Scaling recorded in the result
        min_sd_bpm: Spread below which a candidate's envelope counts as flat
        tie_tol: Correlation margin treated as a tie

    Returns:
        AlignmentParams with the best lag

    Raises:
        NoAlignmentError: If no lag has enough jointly valid windows
    """
    step = _check_grid(ref, est)
    max_steps = int(np.floor(max_lag_s / step + 1e-9))

    scores: Dict[int, float] = {}
    overlapping = False
    for lag in range(-max_steps, max_steps + 1):
        r, e, valid = paired_windows(ref, est, lag)
        if valid.sum() < min_common:
            continue
        overlapping = True
        rv, ev = r[valid], e[valid]
        if rv.std() < min_sd_bpm or ev.std() < min_sd_bpm:
            continue
        scores[lag] = float(np.mean(_znorm(rv) * _znorm(ev)))

    if not overlapping:
        raise NoAlignmentError(
            f"No lag within +-{max_lag_s} s has {min_common} jointly valid windows"
        )
    if not scores:
        logger.info(
            f"Heart-rate envelopes are flat (sd < {min_sd_bpm} bpm); using zero lag"
        )
        return AlignmentParams(lag_s=0.0, scale_mode=scale_mode, max_lag_s=max_lag_s)

    best_score = max(scores.values())
    best_lag = min(
        (lag for lag, score in scores.items() if score >= best_score - tie_tol),
        key=lambda k: (abs(k), k),
    )
    lag_s = best_lag * step
    logger.info(
        f"Estimated alignment lag {lag_s:+.1f} s (correlation {scores[best_lag]:.3f}, "
        f"best {best_score:.3f})"
    )
    return AlignmentParams(lag_s=lag_s, scale_mode=scale_mode, max_lag_s=max_lag_s)


def dataset_lag(lags: Sequence[float]) -> float:
    """Dataset-level lag: the median of per-video lags."""
    if len(lags) == 0:
        raise NoAlignmentError("No per-video lags to combine")
    return float(np.median(np.asarray(lags, dtype=np.float64)))
