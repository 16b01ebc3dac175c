"""
Face normalization utilities for facepulse.

This module provides the piecewise-affine warp of a frame onto the canonical
mesh and the normalization of whole frame sequences.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np

from ..utils.exceptions import DegenerateFaceError, EmptyStackError, InvalidInputError
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map
from .landmarks import LandmarkFrame, extend_landmarks
from .mesh import CanonicalMesh

logger = get_logger()

# Source triangles smaller than this (px^2) are not sampled
EPS_AREA = 1e-2


@dataclass(frozen=True)
class NormalizedFaceStack:
    """Sequence of faces warped to canonical coordinates.

    Attributes:
        frames: (N, H_c, W_c, 3) uint8 rasters
        fs: Frame rate in Hz
        validity: (N,) True where the frame had usable landmarks
        mask: (H_c, W_c) canonical pixels covered by the mesh
        degenerate_frames: Number of frames with at least one collapsed triangle
    """

    frames: np.ndarray
    fs: float
    validity: np.ndarray
    mask: np.ndarray
    degenerate_frames: int = 0

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    def window(self, start: int, stop: int) -> "NormalizedFaceStack":
        return NormalizedFaceStack(
            self.frames[start:stop],
            self.fs,
            self.validity[start:stop],
            self.mask,
            self.degenerate_frames,
        )


def _clamp(points: np.ndarray, width: int, height: int) -> np.ndarray:
    out = points.copy()
    out[:, 0] = np.clip(out[:, 0], 0, width - 1)
    out[:, 1] = np.clip(out[:, 1], 0, height - 1)
    return out


def warp_with_flags(
    frame: np.ndarray, lm: LandmarkFrame, mesh: CanonicalMesh
) -> Tuple[np.ndarray, np.ndarray]:
    """Warp a frame into the canonical raster and report collapsed triangles.

    Each canonical pixel is mapped to the source by the affine map of the
    triangle that owns it and sampled bilinearly with edge clamping.

    Args:
        frame: (H, W, 3) RGB raster
        lm: 85-point (or 68-point, extended here) landmarks in frame pixels
        mesh: Canonical mesh

    Returns:
        Tuple of (canonical raster, indices of source triangles below the area threshold)
    """
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise InvalidInputError(f"Frame must be (H, W, 3), got {frame.shape}")
    lm85 = extend_landmarks(lm)
    height, width = frame.shape[:2]
    src = _clamp(lm85.points, width, height)

    pmap = mesh.pixel_map
    inside = pmap.triangle >= 0
    tri_idx = np.where(inside, pmap.triangle, 0)

    corners = src[mesh.triangles]  # (T, 3, 2)
    per_pixel = corners[tri_idx]  # (H_c, W_c, 3, 2)
    mapped = np.einsum("hwk,hwkd->hwd", pmap.weights, per_pixel)
    map_x = mapped[..., 0].astype(np.float32)
    map_y = mapped[..., 1].astype(np.float32)

    out = cv2.remap(
        frame,
        map_x,
        map_y,
        interpolation=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )

    collapsed = np.flatnonzero(mesh.triangle_areas(src) < EPS_AREA)
    valid = inside.copy()
    if collapsed.size:
        valid &= ~np.isin(pmap.triangle, collapsed)
    out[~valid] = 0
    return out, collapsed


def warp_to_canonical(frame: np.ndarray, lm: LandmarkFrame, mesh: CanonicalMesh) -> np.ndarray:
    """Warp a frame's face into the canonical raster; pixels outside the mesh are zero.

    Args:
        frame: (H, W, 3) RGB raster
        lm: Landmarks in frame pixels
        mesh: Canonical mesh

    Returns:
        (size, size, 3) raster of the frame's dtype
    """
    out, collapsed = warp_with_flags(frame, lm, mesh)
    if collapsed.size:
        logger.warning(
            f"Frame {lm.frame_index}: {collapsed.size} source triangles below "
            f"{EPS_AREA} px^2 left blank"
        )
    return out


def normalize_sequence(
    frames: Sequence[np.ndarray],
    landmarks: Sequence[Optional[LandmarkFrame]],
    mesh: CanonicalMesh,
    fs: float,
    max_workers: int = 1,
) -> NormalizedFaceStack:
    """Warp every frame of a sequence to canonical coordinates.

    Frames without usable landmarks hold the previous valid raster (the first
    valid raster for leading gaps) and are marked invalid.

    Args:
        frames: RGB rasters
        landmarks: One entry per frame; None where landmarks are missing
        mesh: Canonical mesh
        fs: Frame rate in Hz
        max_workers: Threads used for warping

    Returns:
        The normalized stack

    Raises:
        InvalidInputError: If the sequences differ in length
        EmptyStackError: If no frame has usable landmarks
    """
    if len(frames) != len(landmarks):
        raise InvalidInputError(
            f"{len(frames)} frames but {len(landmarks)} landmark entries"
        )

    usable: List[Optional[LandmarkFrame]] = []
    for i, lm in enumerate(landmarks):
        if lm is None:
            usable.append(None)
            continue
        try:
            usable.append(extend_landmarks(lm))
        except DegenerateFaceError as e:
            logger.warning(f"Frame {i}: {e}; treated as missing")
            usable.append(None)

    valid_idx = [i for i, lm in enumerate(usable) if lm is not None]
    if not valid_idx:
        raise EmptyStackError("No frame has usable landmarks")

    # Build the pixel map once before fanning out
    _ = mesh.pixel_map

    def _warp(i: int) -> Tuple[np.ndarray, int]:
        raster, collapsed = warp_with_flags(frames[i], usable[i], mesh)
        return raster, int(collapsed.size)

    warped = parallel_map(_warp, valid_idx, max_workers=max_workers, use_threads=True)
    if len(warped) != len(valid_idx):
        raise InvalidInputError("Frame warping failed for some frames")

    size = mesh.size
    stack = np.zeros((len(frames), size, size, 3), dtype=np.uint8)
    validity = np.zeros(len(frames), dtype=bool)
    degenerate = 0
    for i, (raster, n_collapsed) in zip(valid_idx, warped):
        stack[i] = raster
        validity[i] = True
        if n_collapsed:
            degenerate += 1

    last: Optional[int] = None
    first = valid_idx[0]
    for i in range(len(frames)):
        if validity[i]:
            last = i
        else:
            stack[i] = stack[last if last is not None else first]

    if degenerate:
        logger.warning(f"{degenerate} frames had collapsed source triangles")
    logger.debug(
        f"Normalized {len(frames)} frames ({len(frames) - len(valid_idx)} held from neighbours)"
    )
    return NormalizedFaceStack(stack, fs, validity, mesh.mask.copy(), degenerate)
