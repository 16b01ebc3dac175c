"""
RGB-to-pulse methods for facepulse.

This module provides the trace-based conversion methods: GREEN, CHROM, POS,
PCA, ICA, PBV, LGI, LAB and OMIT.
"""

import warnings
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.decomposition import FastICA
from sklearn.exceptions import ConvergenceWarning

from ..utils.exceptions import DegenerateTraceError
from ..utils.logging import get_logger
from ..utils.schemas import MethodOptions
from .base import PulseWindow, TraceMatrix, finalize, select_component

logger = get_logger()

DEFAULT_BAND = (0.75, 4.0)
DEFAULT_OPTIONS = MethodOptions()

# sRGB (D65) to XYZ
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = _RGB_TO_XYZ.sum(axis=1)

_POS_PROJECTION = np.array([[0.0, 1.0, -1.0], [-2.0, 1.0, 1.0]])


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def green(trace: TraceMatrix, **_) -> PulseWindow:
    """Green channel, mean removed."""
    g = trace.C[1]
    return finalize(g, float(g.var()), trace.fs, "green")


def chrom(trace: TraceMatrix, **_) -> PulseWindow:
    """Chrominance method: S = X - (sigma_X / sigma_Y) * Y on mean-normalized rows."""
    r, g, b = trace.normalized()
    x = 3.0 * r - 2.0 * g
    y = 1.5 * r + g - 1.5 * b
    alpha = _ratio(x.std(), y.std())
    s = x - alpha * y
    return finalize(s, float(r.var() + g.var() + b.var()), trace.fs, "chrom")


def pos(trace: TraceMatrix, options: MethodOptions = DEFAULT_OPTIONS, **_) -> PulseWindow:
    """Plane-orthogonal-to-skin method with overlap-added sub-windows."""
    n = trace.n
    length = min(max(int(options.pos_window_s * trace.fs), 2), n)

    windows = sliding_window_view(trace.C, length, axis=1)  # (3, M, length)
    means = windows.mean(axis=2, keepdims=True)
    if np.any(means == 0):
        raise DegenerateTraceError("Cannot mean-normalize a zero-mean channel")
    normed = windows / means
    s1 = np.einsum("c,cml->ml", _POS_PROJECTION[0], normed)
    s2 = np.einsum("c,cml->ml", _POS_PROJECTION[1], normed)

    sd1 = s1.std(axis=1)
    sd2 = s2.std(axis=1)
    alpha = np.divide(sd1, sd2, out=np.zeros_like(sd1), where=sd2 > 0)
    h = s1 + alpha[:, None] * s2
    h = h - h.mean(axis=1, keepdims=True)

    out = np.zeros(n)
    n_windows = h.shape[0]
    for j in range(length):
        out[j : j + n_windows] += h[:, j]

    input_var = float(trace.normalized().var(axis=1).sum())
    return finalize(out, input_var, trace.fs, "pos")


def pca_method(
    trace: TraceMatrix, band: Tuple[float, float] = DEFAULT_BAND, **_
) -> PulseWindow:
    """Principal component with the strongest in-band peak, signed to follow G."""
    x = trace.centered()
    _, vectors = np.linalg.eigh(np.cov(x))
    components = vectors.T[::-1] @ x  # descending eigenvalue order
    chosen, index = select_component(components, trace.fs, band, x[1])
    return finalize(chosen, float(x.var(axis=1).sum()), trace.fs, "pca", (f"component_{index}",))


def ica_method(
    trace: TraceMatrix,
    options: MethodOptions = DEFAULT_OPTIONS,
    band: Tuple[float, float] = DEFAULT_BAND,
    **_,
) -> PulseWindow:
    """Symmetric FastICA on the whitened rows with a fixed seed.

    Raises:
        DegenerateTraceError: If the rows are rank deficient (whitening impossible)
    """
    x = trace.centered()
    singular = np.linalg.svd(x, compute_uv=False)
    if singular[0] == 0 or singular[-1] <= 1e-8 * singular[0]:
        raise DegenerateTraceError("ICA needs three linearly independent channels")

    ica = FastICA(
        n_components=3,
        algorithm="parallel",
        whiten="unit-variance",
        max_iter=options.ica_max_iter,
        random_state=options.ica_seed,
    )
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        sources = ica.fit_transform(x.T).T
    if any(issubclass(w.category, ConvergenceWarning) for w in caught):
        logger.warning("FastICA did not converge; using the last iterate")
        flags.append("ica_not_converged")

    chosen, index = select_component(sources, trace.fs, band, x[1])
    flags.append(f"component_{index}")
    return finalize(chosen, float(x.var(axis=1).sum()), trace.fs, "ica", flags)


def pbv(trace: TraceMatrix, options: MethodOptions = DEFAULT_OPTIONS, **_) -> PulseWindow:
    """Blood-volume-pulse signature method: S = w^T C / (pbv^T w), w = (C C^T)^-1 pbv."""
    c = trace.normalized()
    c = c - c.mean(axis=1, keepdims=True)
    signature = np.asarray(options.pbv_signature, dtype=np.float64)
    signature = signature / np.linalg.norm(signature)

    q = c @ c.T
    flags = ["mean_normalized"]
    trace_q = float(np.trace(q))
    if trace_q == 0:
        return finalize(np.zeros(trace.n), 0.0, trace.fs, "pbv", flags)

    if np.linalg.matrix_rank(q) < 3:
        q = q + 1e-9 * trace_q * np.eye(3)
        flags.append("pbv_ridge")
        logger.warning("PBV covariance is singular; applied ridge regularisation")

    w = np.linalg.solve(q, signature)
    denom = float(signature @ w)
    s = (w @ c) / denom if denom != 0 else w @ c
    return finalize(s, float(c.var(axis=1).sum()), trace.fs, "pbv", flags)


def lgi(trace: TraceMatrix, **_) -> PulseWindow:
    """Local group invariance.

    The SVD runs on the raw rows so the first left singular vector is the skin
    colour direction. It is projected out and the second projected row, mean
    removed, is the pulse.
    """
    x = trace.C
    u, _, _ = np.linalg.svd(x, full_matrices=False)
    s = u[:, :1]
    projector = np.eye(3) - s @ s.T
    y = projector @ x
    return finalize(y[1], float(x.var(axis=1).sum()), trace.fs, "lgi")


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    delta = 6.0 / 29.0
    return np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert 8-bit sRGB rows (3 x N) to CIELab rows (L, a, b) under D65."""
    linear = _srgb_to_linear(np.clip(rgb / 255.0, 0.0, None))
    xyz = _RGB_TO_XYZ @ linear
    f = _lab_f(xyz / _WHITE_D65[:, None])
    return np.vstack(
        [116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])]
    )


def lab_method(trace: TraceMatrix, **_) -> PulseWindow:
    """CIELab a-channel of the per-frame mean colour."""
    a = rgb_to_lab(trace.C)[1]
    input_var = float(trace.C.var(axis=1).sum()) / 255.0**2
    return finalize(a, input_var, trace.fs, "lab")


def omit_basis(c: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Householder QR of a 3 x N matrix with the colour-direction sign convention.

    Q's columns are signed so that R has a non-negative diagonal, then the first
    column is flipped if needed so that it points along the row means.

    Returns:
        Tuple of (Q (3 x 3, orthonormal), R (3 x N))
    """
    q, r = np.linalg.qr(c)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = r * signs[:, None]
    if float(q[:, 0] @ c.mean(axis=1)) < 0:
        q[:, 0] = -q[:, 0]
        r[0] = -r[0]
    return q, r


def omit(trace: TraceMatrix, normalize: bool = True, **_) -> PulseWindow:
    """Orthogonal matrix image transformation.

    The (mean-normalized) trace matrix is QR-factorised; the first column of Q
    is the skin colour direction S, P = I - S S^T removes it and the output is
    the mean-removed second row of P C.
    """
    c = trace.normalized() if normalize else trace.C
    q, _ = omit_basis(c)
    s = q[:, :1]
    projector = np.eye(3) - s @ s.T
    y = projector @ c
    flags = ("mean_normalized",) if normalize else ()
    return finalize(y[1], float(c.var(axis=1).sum()), trace.fs, "omit", flags)


__all__ = [
    "chrom",
    "green",
    "ica_method",
    "lab_method",
    "lgi",
    "omit",
    "omit_basis",
    "pbv",
    "pca_method",
    "pos",
    "rgb_to_lab",
]
