"""
Spatial subspace rotation (2SR) for facepulse.

This module provides the pixel-based 2SR method, which tracks the rotation of
the skin-colour subspace across the frames of a normalized face stack.
"""

from typing import Optional, Tuple

import numpy as np

from ..facegeom.warp import NormalizedFaceStack
from ..utils.exceptions import DegenerateTraceError, InvalidInputError
from ..utils.logging import get_logger
from .base import MIN_SAMPLES, PulseWindow, finalize

logger = get_logger()

_EIG_EPS = 1e-12


def skin_pixels(stack: NormalizedFaceStack, skin_mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-frame skin mask: inside the mesh and not zeroed by the warp.

    Returns:
        (N, H, W) boolean array
    """
    mask = stack.mask if skin_mask is None else np.asarray(skin_mask, dtype=bool)
    if mask.shape != stack.frames.shape[1:3]:
        raise InvalidInputError(
            f"Skin mask shape {mask.shape} does not match rasters {stack.frames.shape[1:3]}"
        )
    return mask[None, :, :] & np.any(stack.frames > 0, axis=3)


def frame_eigensystems(
    stack: NormalizedFaceStack, skin_mask: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose each frame's 3 x 3 skin-pixel correlation matrix.

    Eigenvalues are sorted in descending order and every eigenvector is signed
    to have a non-negative sum of components.

    Returns:
        Tuple of (eigenvalues (N, 3), eigenvectors (N, 3, 3) with vectors as columns)

    Raises:
        DegenerateTraceError: If a frame has no skin pixels
    """
    pixels = skin_pixels(stack, skin_mask)
    n = len(stack)
    corr = np.empty((n, 3, 3))
    for t in range(n):
        v = stack.frames[t][pixels[t]].astype(np.float64)
        if v.shape[0] == 0:
            raise DegenerateTraceError(f"Frame {t} has no skin pixels")
        corr[t] = v.T @ v / v.shape[0]

    values, vectors = np.linalg.eigh(corr)
    values = values[:, ::-1]
    vectors = vectors[:, :, ::-1]
    signs = np.where(vectors.sum(axis=1) < 0, -1.0, 1.0)
    vectors = vectors * signs[:, None, :]
    return values, vectors


def ssr_2sr(
    stack: NormalizedFaceStack, skin_mask: Optional[np.ndarray] = None
) -> PulseWindow:
    """2SR pulse over one window of a normalized face stack.

    The first frame of the window is the reference subspace (backward stride
    equal to the window length). For every frame t, the rotation of the
    dominant eigenvector u1_t into the reference's u2, u3 plane, scaled by the
    eigenvalue ratios, gives a two-component rotation signal that is combined
    as p = SR_1 - (sigma_1 / sigma_2) * SR_2.

    Args:
        stack: Normalized face stack window (>= 32 frames)
        skin_mask: Canonical skin mask (defaults to the mesh mask)

    Returns:
        PulseWindow with method "2sr"; flagged "ssr_eig_order" when the dominant
        eigenvalue is not strictly the largest in some frame
    """
    n = len(stack)
    if n < MIN_SAMPLES:
        raise InvalidInputError(f"2SR needs at least {MIN_SAMPLES} frames, got {n}")

    values, vectors = frame_eigensystems(stack, skin_mask)
    flags = []
    if np.any(values[:, 0] <= values[:, 1]):
        flags.append("ssr_eig_order")
        logger.warning("2SR: dominant eigenvalue not strictly largest in some frames")

    floor = _EIG_EPS * max(float(values[:, 0].max()), _EIG_EPS)
    lam = np.maximum(values, floor)
    u1 = vectors[:, :, 0]
    ref_u2 = vectors[0, :, 1]
    ref_u3 = vectors[0, :, 2]

    rot2 = np.sqrt(lam[:, 0] / lam[0, 1]) * (u1 @ ref_u2)
    rot3 = np.sqrt(lam[:, 0] / lam[0, 2]) * (u1 @ ref_u3)
    sr = np.outer(rot2, ref_u2) + np.outer(rot3, ref_u3)  # (N, 3)

    sd0 = float(sr[:, 0].std())
    sd1 = float(sr[:, 1].std())
    p = sr[:, 0] - (sd0 / sd1) * sr[:, 1] if sd1 > 0 else sr[:, 0]

    means = np.array([stack.frames[t][stack.mask].mean(axis=0) for t in range(n)])
    input_var = float(means.var(axis=0).sum())
    return finalize(p, input_var, stack.fs, "2sr", flags)
