"""
Frame-space masks for facepulse.

This module provides the landmark-polygon skin mask used by the unnormalized
pipelines and the fixed crop box of the baseline-like pipeline.
"""

from typing import Tuple

import cv2
import numpy as np

from .landmarks import (
    EYE_LEFT,
    EYE_RIGHT,
    FOREHEAD_APEX,
    FOREHEAD_TOP,
    JAW,
    MOUTH_OUTER,
    LandmarkFrame,
    extend_landmarks,
)

CROP_KEEP = 0.6


def skin_mask(lm: LandmarkFrame, height: int, width: int) -> np.ndarray:
    """Face polygon (jaw, forehead) minus eyes and mouth, rasterised in frame pixels.

    Args:
        lm: Landmarks of the frame
        height: Frame height
        width: Frame width

    Returns:
        Boolean (height, width) mask
    """
    points = extend_landmarks(lm).points
    outline = points[list(JAW) + list(FOREHEAD_TOP) + [FOREHEAD_APEX]]
    hull = cv2.convexHull(np.round(outline).astype(np.int32))

    mask = np.zeros((height, width), dtype=np.uint8)
    cv2.fillConvexPoly(mask, hull, 1)
    for group in (EYE_LEFT, EYE_RIGHT, MOUTH_OUTER):
        poly = np.round(points[list(group)]).astype(np.int32)
        cv2.fillPoly(mask, [poly], 0)
    return mask.astype(bool)


def crop_box(lm: LandmarkFrame, height: int, width: int) -> Tuple[int, int, int, int]:
    """Central part of the 68-point bounding box as (x0, y0, x1, y1), half-open.

    The box is clipped to the frame and always keeps at least one pixel.
    """
    points = lm.points[:68]
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    centre = (lo + hi) / 2.0
    half = (hi - lo) * CROP_KEEP / 2.0
    x0 = int(np.clip(np.floor(centre[0] - half[0]), 0, width - 1))
    y0 = int(np.clip(np.floor(centre[1] - half[1]), 0, height - 1))
    x1 = int(np.clip(np.ceil(centre[0] + half[0]), x0 + 1, width))
    y1 = int(np.clip(np.ceil(centre[1] + half[1]), y0 + 1, height))
    return x0, y0, x1, y1
