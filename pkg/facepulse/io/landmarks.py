"""
Landmark file utilities for facepulse.

This module provides the reader and writer of landmark CSV files with the
header ``frame,x0,y0,...,x67,y67`` (or the 85-point variant).
"""

import csv
import math
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..facegeom.landmarks import N_BASE, N_EXTENDED, LandmarkFrame
from ..utils.exceptions import InvalidInputError, LandmarkFormatError
from ..utils.logging import get_logger

logger = get_logger()


def landmark_header(n_points: int = N_BASE) -> List[str]:
    header = ["frame"]
    for i in range(n_points):
        header += [f"x{i}", f"y{i}"]
    return header


def load_landmarks(path: str, n_frames: Optional[int] = None) -> List[Optional[LandmarkFrame]]:
    """Read a landmark CSV file.

    Frame indices are zero-based. Frames without a row, or whose row has empty
    coordinate cells, are absent (None) in the result.

    Args:
        path: CSV file path
        n_frames: Length of the result (defaults to the largest frame index + 1)

    Returns:
        One entry per frame index

    Raises:
        LandmarkFormatError: On a bad header or a malformed row (reported with its line number)
    """
    rows = {}
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise LandmarkFormatError(f"{path}: empty landmark file")
        header = [h.strip() for h in header]
        n_points = (len(header) - 1) // 2
        if n_points not in (N_BASE, N_EXTENDED) or header != landmark_header(n_points):
            raise LandmarkFormatError(
                f"{path}:1: header must be frame,x0,y0,... with {N_BASE} or {N_EXTENDED} points"
            )

        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise LandmarkFormatError(
                    f"{path}:{line}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                index = int(row[0])
            except ValueError as e:
                raise LandmarkFormatError(f"{path}:{line}: bad frame index '{row[0]}'") from e
            if index < 0:
                raise LandmarkFormatError(f"{path}:{line}: negative frame index {index}")
            if index in rows:
                raise LandmarkFormatError(f"{path}:{line}: duplicate frame index {index}")

            cells = [c.strip() for c in row[1:]]
            if all(not c for c in cells):
                rows[index] = None
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError as e:
                raise LandmarkFormatError(f"{path}:{line}: non-numeric coordinate") from e
            if any(math.isnan(v) for v in values):
                rows[index] = None
                continue
            try:
                rows[index] = LandmarkFrame(np.reshape(values, (n_points, 2)), frame_index=index)
            except InvalidInputError as e:
                raise LandmarkFormatError(f"{path}:{line}: {e}") from e

    length = n_frames if n_frames is not None else (max(rows) + 1 if rows else 0)
    result: List[Optional[LandmarkFrame]] = [None] * length
    for index, lm in rows.items():
        if index < length:
            result[index] = lm
    missing = sum(lm is None for lm in result)
    if missing:
        logger.info(f"{path}: {missing}/{length} frames without landmarks")
    return result


def write_landmarks(landmarks: Sequence[Optional[LandmarkFrame]], path: str) -> str:
    """Write landmarks to CSV; None entries become rows with empty coordinates."""
    present = [lm for lm in landmarks if lm is not None]
    n_points = present[0].points.shape[0] if present else N_BASE
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(landmark_header(n_points))
        for index, lm in enumerate(landmarks):
            if lm is None:
                writer.writerow([index] + [""] * (2 * n_points))
            else:
                writer.writerow([index] + [f"{v:.4f}" for v in lm.points.reshape(-1)])
    return path
