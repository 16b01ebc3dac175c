"""
Tests for the RGB-to-pulse methods and their registry.
"""

import numpy as np
import pytest

from facepulse.facegeom.warp import NormalizedFaceStack
from facepulse.rppg import (
    METHODS,
    TraceMatrix,
    convert,
    frame_eigensystems,
    get_method,
    lgi,
    omit,
    omit_basis,
    rgb_to_lab,
)
from facepulse.spectral.heartrate import estimate_hr
from facepulse.utils.exceptions import DegenerateTraceError, InvalidInputError
from facepulse.utils.schemas import MethodOptions

FS = 30.0
BASE = np.array([200.0, 150.0, 130.0])
PULSATILITY = np.array([0.33, 0.77, 0.53]) / 0.77
TRACE_METHODS = ["green", "chrom", "pos", "pca", "ica", "pbv", "lab", "omit", "lgi"]


def _times(duration_s=10.0):
    return np.arange(int(duration_s * FS)) / FS


def _pulse_trace(bpm=72.0, amplitude=0.01, noise=0.05, light=0.0, seed=0):
    t = _times()
    pulse = np.sin(2 * np.pi * bpm / 60.0 * t)
    illumination = light * np.sin(2 * np.pi * 0.3 * t)
    rng = np.random.default_rng(seed)
    c = BASE[:, None] * (1.0 + amplitude * PULSATILITY[:, None] * pulse + illumination)
    return TraceMatrix(c + rng.normal(0.0, noise, c.shape), FS)


@pytest.mark.parametrize("method", TRACE_METHODS)
def test_trace_methods_recover_pulse_rate(method):
    """Test that every trace method puts its spectral peak at the pulse rate."""
    window = convert(method, trace=_pulse_trace(bpm=72.0))
    assert window.method == method
    assert len(window) == 300
    assert not window.flat
    assert abs(window.samples.mean()) < 1e-9
    assert estimate_hr(window) == pytest.approx(72.0, abs=3.0)


def test_lgi_removes_illumination():
    """Test that LGI projects out a dominant illumination change."""
    window = lgi(_pulse_trace(bpm=90.0, light=0.05))
    assert estimate_hr(window) == pytest.approx(90.0, abs=3.0)


@pytest.mark.parametrize("method", ["chrom", "pos", "omit", "lgi"])
def test_pure_intensity_change_is_flat(method):
    """Test that a change along the skin colour alone yields a flat output."""
    t = _times()
    c = BASE[:, None] * (1.0 + 0.02 * np.sin(2 * np.pi * 1.2 * t))
    window = convert(method, trace=TraceMatrix(c, FS))
    assert window.flat
    assert estimate_hr(window) is None



@pytest.mark.parametrize("bpm", [54.0, 72.0, 150.0])
def test_omit_and_lgi_agree_on_rank_two_input(bpm):
    """Test that OMIT and LGI recover the same pulse from a rank-two trace."""
    t = _times()
    pulse = np.sin(2 * np.pi * bpm / 60.0 * t) + 0.3 * np.sin(4 * np.pi * bpm / 60.0 * t)
    direction = np.array([0.4, 1.5, -0.6])
    c = BASE[:, None] + direction[:, None] * pulse[None, :]
    trace = TraceMatrix(c, FS)
    a, b = omit(trace), lgi(trace)
    assert not a.flat and not b.flat
    assert abs(np.corrcoef(a.samples, b.samples)[0, 1]) >= 0.99
    assert abs(np.corrcoef(b.samples, pulse)[0, 1]) >= 0.99


def test_lgi_projects_out_skin_direction():
    """Test that the LGI output has no component along the removed direction."""
    trace = _pulse_trace(light=0.05, seed=2)
    u, _, _ = np.linalg.svd(trace.C, full_matrices=False)
    s = u[:, :1]
    y = (np.eye(3) - s @ s.T) @ trace.C
    assert np.max(np.abs(s.T @ y)) <= 1e-10 * np.abs(trace.C).max()
    window = lgi(trace)
    assert np.allclose(window.samples, y[1] - y[1].mean())

def test_omit_basis_orthonormal():
    """Test the QR basis sign convention."""
    c = _pulse_trace().normalized()
    q, r = omit_basis(c)
    assert np.allclose(q.T @ q, np.eye(3))
    assert np.allclose(q @ r, c)
    assert q[:, 0] @ c.mean(axis=1) > 0
    assert np.all(np.diag(r)[1:] >= 0)


def test_omit_without_normalization():
    """Test the raw-trace OMIT variant and its flags."""
    trace = _pulse_trace()
    assert omit(trace).flags == ("mean_normalized",)
    raw = omit(trace, normalize=False)
    assert raw.flags == ()
    assert estimate_hr(raw) == pytest.approx(72.0, abs=3.0)


def test_ica_is_deterministic():
    """Test that ICA with a fixed seed gives identical output."""
    trace = _pulse_trace(seed=3)
    options = MethodOptions(ica_seed=7)
    a = convert("ica", trace=trace, options=options)
    b = convert("ica", trace=trace, options=options)
    assert np.array_equal(a.samples, b.samples)


def test_ica_rank_deficient_input():
    """Test that ICA rejects linearly dependent channels."""
    t = _times()
    row = 100.0 + np.sin(2 * np.pi * 1.2 * t)
    with pytest.raises(DegenerateTraceError):
        convert("ica", trace=TraceMatrix(np.vstack([row, row, row]), FS))


def test_pbv_singular_covariance_regularised():
    """Test that PBV falls back to a ridge on a singular covariance."""
    t = _times()
    row = 100.0 * (1.0 + 0.01 * np.sin(2 * np.pi * 1.2 * t))
    window = convert("pbv", trace=TraceMatrix(np.vstack([row, row, row]), FS))
    assert "pbv_ridge" in window.flags


def test_trace_matrix_validation():
    """Test TraceMatrix preconditions."""
    with pytest.raises(InvalidInputError):
        TraceMatrix(np.ones((2, 100)), FS)
    with pytest.raises(InvalidInputError):
        TraceMatrix(np.ones((3, 10)), FS)
    bad = np.ones((3, 100))
    bad[0, 5] = np.nan
    with pytest.raises(InvalidInputError):
        TraceMatrix(bad, FS)
    zero = np.ones((3, 100))
    zero[2] = 0.0
    with pytest.raises(DegenerateTraceError):
        TraceMatrix(zero, FS).normalized()


def test_registry_lookup():
    """Test method lookup and dispatch errors."""
    assert set(METHODS) == {
        "green", "ica", "pca", "chrom", "pbv", "2sr", "lab", "pos", "lgi", "omit"
    }
    assert get_method("CHROM").name == "chrom"
    assert get_method("2sr").needs_pixels
    with pytest.raises(InvalidInputError):
        get_method("xyz")
    with pytest.raises(InvalidInputError):
        convert("2sr", trace=_pulse_trace())
    with pytest.raises(InvalidInputError):
        convert("green")


def test_rgb_to_lab_white_and_grey():
    """Test the CIELab conversion on neutral colours."""
    lab = rgb_to_lab(np.array([[255.0, 128.0], [255.0, 128.0], [255.0, 128.0]]))
    assert lab[0, 0] == pytest.approx(100.0, abs=0.01)
    assert np.allclose(lab[1:], 0.0, atol=0.01)


def _pixel_stack(n=90, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / FS
    pulse = np.sin(2 * np.pi * 1.2 * t)
    frames = BASE[None, None, None, :] * (
        1.0 + 0.02 * PULSATILITY[None, None, None, :] * pulse[:, None, None, None]
    )
    frames = frames + rng.normal(0.0, 4.0, (n, 16, 16, 3))
    frames = np.clip(np.rint(frames), 1, 255).astype(np.uint8)
    return NormalizedFaceStack(frames, FS, np.ones(n, bool), np.ones((16, 16), bool))


def test_frame_eigensystems_sorted():
    """Test the per-frame eigen-decomposition ordering and signs."""
    values, vectors = frame_eigensystems(_pixel_stack())
    assert values.shape == (90, 3)
    assert np.all(np.diff(values, axis=1) <= 0)
    assert np.all(vectors.sum(axis=1) >= 0)


def test_2sr_window():
    """Test the pixel-based method on a normalized stack window."""
    stack = _pixel_stack()
    window = convert("2sr", stack=stack)
    assert window.method == "2sr"
    assert len(window) == len(stack)
    assert np.all(np.isfinite(window.samples))
    again = convert("2sr", stack=stack)
    assert np.array_equal(window.samples, again.samples)
    with pytest.raises(InvalidInputError):
        convert("2sr", stack=stack.window(0, 10))
