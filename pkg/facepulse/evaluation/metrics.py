"""
Error metrics for facepulse.

This module provides the per-video comparison of extracted and reference
heart-rate series (MAE, SD of absolute errors, RMSE and PCC).
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..spectral.heartrate import HrSeries
from ..utils.exceptions import InsufficientDataError, InvalidInputError
from ..utils.logging import get_logger
from .alignment import AlignmentParams, apply_alignment

logger = get_logger()

MIN_WINDOWS = 3


@dataclass(frozen=True)
class MetricsReport:
    """Agreement between an extracted and a reference heart-rate series.

    ``mae_sd_bpm`` is the population SD of the per-window absolute errors.
    ``pcc`` is None when either envelope is constant.
    """

    video_id: str
    mae_bpm: float
    mae_sd_bpm: float
    rmse_bpm: float
    pcc: Optional[float]
    n_windows: int
    lag_s: float = 0.0
    aligned: bool = True
    scenario: str = "default"
    method: str = ""
    pipeline: str = ""
    grid_n: Optional[int] = None
    regions: str = ""

    def __post_init__(self):
        if not self.mae_bpm >= 0:
            raise InvalidInputError(f"MAE must be non-negative, got {self.mae_bpm}")
        if not self.rmse_bpm >= self.mae_bpm - 1e-9:
            raise InvalidInputError(
                f"RMSE {self.rmse_bpm} is below MAE {self.mae_bpm}; the errors are inconsistent"
            )
        if self.pcc is not None and not -1.0 - 1e-12 <= self.pcc <= 1.0 + 1e-12:
            raise InvalidInputError(f"PCC must lie in [-1, 1], got {self.pcc}")

    @property
    def pcc_defined(self) -> bool:
        return self.pcc is not None

    def to_dict(self) -> Dict[str, Any]:
        row = asdict(self)
        row["pcc_defined"] = self.pcc_defined
        return row


def pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Pearson correlation, None when either input has zero variance."""
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0:
        return None
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def compute_metrics(
    ref: HrSeries,
    est: HrSeries,
    align: Optional[AlignmentParams] = None,
    video_id: str = "",
    **meta: Any,
) -> MetricsReport:
    """Compare two heart-rate series over their jointly valid windows.

    Args:
        ref: Reference series
        est: Extracted series on the same grid
        align: Lag to apply (zero lag when None)
        video_id: Identifier stored in the report
        **meta: scenario, method, pipeline, grid_n, regions

    Returns:
        MetricsReport

    Raises:
        InsufficientDataError: If fewer than 3 windows are jointly valid
    """
    align = align or AlignmentParams()
    r, e = apply_alignment(ref, est, align)
    if r.size < MIN_WINDOWS:
        raise InsufficientDataError(
            f"{video_id or 'series'}: only {r.size} jointly valid windows (need {MIN_WINDOWS})"
        )

    abs_err = np.abs(e - r)
    pcc = pearson(r, e)
    if pcc is None:
        logger.warning(f"{video_id or 'series'}: PCC undefined (constant envelope)")

    return MetricsReport(
        video_id=video_id,
        mae_bpm=float(abs_err.mean()),
        mae_sd_bpm=float(abs_err.std()),
        rmse_bpm=float(np.sqrt(np.mean((e - r) ** 2))),
        pcc=pcc,
        n_windows=int(r.size),
        lag_s=align.lag_s,
        aligned=align.aligned,
        **meta,
    )
