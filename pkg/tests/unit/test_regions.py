"""
Tests for region geometry, quality statistics and selection.
"""

import math

import numpy as np
import pytest

from facepulse.dsp.spectrum import welch_psd
from facepulse.facegeom.landmarks import canonical_shape_85
from facepulse.facegeom.warp import NormalizedFaceStack
from facepulse.regions.fractal import dfa_alpha, dfa_scales, katz_fd
from facepulse.regions.grid import (
    FOREHEAD_ID,
    LEFT_CHEEK_ID,
    RIGHT_CHEEK_ID,
    RegionBox,
    RgbTrace,
    extract_traces,
    fixed_patches,
    grid_partition,
    masked_trace,
)
from facepulse.regions.quality import (
    RegionStats,
    compute_region_stats,
    sample_entropy,
    snr_db,
    zero_crossings,
)
from facepulse.regions.selection import aggregate_regions, select_regions
from facepulse.utils.exceptions import InvalidInputError, UndefinedKfdError
from facepulse.utils.schemas import SelectionConfig


def _stats(region_id, variance=1.0, kfd=1.5, alpha=0.9, energy=1.0):
    return RegionStats(
        region_id=region_id,
        mean=0.0,
        std=math.sqrt(variance),
        variance=variance,
        snr_db=0.0,
        kfd=kfd,
        zero_crossings=0,
        sample_entropy=0.0,
        dfa_alpha=alpha,
        psd_energy=energy,
    )


def test_grid_partition_covers_raster():
    """Test that the grid tiles the raster in row-major order."""
    boxes = grid_partition(180, 180, 9)
    assert len(boxes) == 81
    assert [b.id for b in boxes] == list(range(81))
    assert sum(b.area for b in boxes) == 180 * 180
    assert all(b.area == 400 for b in boxes)
    assert (boxes[10].x0, boxes[10].y0) == (20, 20)


def test_grid_partition_uneven_split():
    """Test that remainder pixels go to the first rows and columns."""
    boxes = grid_partition(10, 10, 3)
    assert [b.x1 - b.x0 for b in boxes[:3]] == [4, 3, 3]
    assert boxes[3].y0 == 4
    with pytest.raises(InvalidInputError):
        grid_partition(10, 10, 11)


def test_region_box_rejects_empty():
    """Test that empty boxes are rejected."""
    with pytest.raises(InvalidInputError):
        RegionBox(0, 5, 5, 5, 10)


def test_fixed_patches_layout():
    """Test the forehead and cheek patches on the canonical shape."""
    boxes = fixed_patches(canonical_shape_85(), "combined")
    by_id = {b.id: b for b in boxes}
    assert set(by_id) == {FOREHEAD_ID, LEFT_CHEEK_ID, RIGHT_CHEEK_ID}
    forehead, left, right = by_id[FOREHEAD_ID], by_id[LEFT_CHEEK_ID], by_id[RIGHT_CHEEK_ID]
    assert forehead.y1 <= left.y0
    assert left.x1 <= right.x0
    assert len(fixed_patches(canonical_shape_85(), "forehead")) == 1
    assert len(fixed_patches(canonical_shape_85(), "cheeks")) == 2


def test_extract_traces_box_means():
    """Test mean RGB per region from a normalized stack."""
    frames = np.zeros((4, 6, 6, 3), dtype=np.uint8)
    frames[:, :3, :3, 1] = 90
    frames[2, :3, :3, 1] = 120
    stack = NormalizedFaceStack(frames, 30.0, np.ones(4, bool), np.ones((6, 6), bool))
    traces = extract_traces(stack, grid_partition(6, 6, 2))
    assert len(traces) == 4
    assert traces[0].g.tolist() == [90.0, 90.0, 120.0, 90.0]
    assert np.all(traces[3].g == 0)
    assert traces[0].matrix.shape == (3, 4)


def test_masked_trace():
    """Test the trace of a boolean mask and the empty-mask error."""
    frames = np.zeros((2, 4, 4, 3), dtype=np.uint8)
    frames[:, 0, 0] = (30, 60, 90)
    mask = np.zeros((4, 4), bool)
    mask[0, 0] = True
    trace = masked_trace(frames, mask, 30.0)
    assert trace.r.tolist() == [30.0, 30.0]
    assert trace.b.tolist() == [90.0, 90.0]
    with pytest.raises(InvalidInputError):
        masked_trace(frames, np.zeros((4, 4), bool), 30.0)


def test_rgb_trace_slice_and_matrix():
    """Test slicing a trace and rebuilding it from a matrix."""
    m = np.arange(30, dtype=float).reshape(3, 10)
    trace = RgbTrace.from_matrix(m, 30.0, 7)
    part = trace.slice(2, 5)
    assert len(part) == 3
    assert part.region_id == 7
    assert np.array_equal(part.matrix, m[:, 2:5])


def test_katz_fd_line_and_constant():
    """Test Katz FD of a straight line and of a constant series."""
    assert katz_fd(np.arange(100.0)) == pytest.approx(1.0)
    with pytest.raises(UndefinedKfdError):
        katz_fd(np.ones(10))
    with pytest.raises(InvalidInputError):
        katz_fd([1.0, 2.0])


def test_katz_fd_noise_above_sine():
    """Test that an irregular series has a higher Katz FD than a smooth one."""
    t = np.arange(300) / 30.0
    smooth = np.sin(2 * np.pi * 1.2 * t)
    noise = np.random.default_rng(0).standard_normal(300)
    assert katz_fd(noise) > katz_fd(smooth)


def test_dfa_alpha_reference_processes():
    """Test the DFA exponent of white noise and of a random walk."""
    rng = np.random.default_rng(42)
    noise = rng.standard_normal(4096)
    assert dfa_alpha(noise) == pytest.approx(0.5, abs=0.15)
    assert dfa_alpha(np.cumsum(noise)) == pytest.approx(1.5, abs=0.2)
    with pytest.raises(InvalidInputError):
        dfa_alpha(noise[:32])


def test_dfa_scales_bounds():
    """Test that DFA box sizes stay within [4, N/4]."""
    scales = dfa_scales(300)
    assert scales.min() == 4
    assert 70 <= scales.max() <= 75
    assert np.all(np.diff(scales) > 0)


def test_zero_crossings_and_entropy(make_sine):
    """Test zero crossings of a sinusoid and sample entropy ordering."""
    sine = make_sine(1.2, duration_s=10.0).samples
    assert abs(zero_crossings(sine) - 24) <= 1
    noise = np.random.default_rng(1).standard_normal(300)
    assert sample_entropy(sine) < sample_entropy(noise)
    assert math.isnan(sample_entropy(np.ones(50)))


def test_snr_of_clean_sinusoid(make_sine):
    """Test that a clean in-band sinusoid has a high SNR."""
    spectrum = welch_psd(make_sine(1.5, duration_s=10.0))
    assert snr_db(spectrum, (0.75, 4.0)) > 10.0


def test_compute_region_stats(make_sine):
    """Test the quality battery on a pulse-like and a flat trace."""
    sine = make_sine(1.2, duration_s=10.0).samples
    pulse = RgbTrace(sine, sine, sine, 30.0, 4)
    stats = compute_region_stats(pulse)
    assert stats.region_id == 4
    assert stats.variance == pytest.approx(0.5, rel=0.05)
    assert stats.kfd_defined
    assert stats.psd_energy > 0
    assert set(stats.to_dict()) >= {"kfd", "dfa_alpha", "psd_energy", "snr_db"}

    flat = np.zeros(300)
    stats = compute_region_stats(RgbTrace(flat, flat, flat, 30.0, 5))
    assert stats.variance == 0
    assert stats.kfd is None
    assert stats.psd_energy == 0

    with pytest.raises(InvalidInputError):
        compute_region_stats(RgbTrace(sine[:32], sine[:32], sine[:32], 30.0, 6))


def test_select_regions_cascade():
    """Test the variance, Katz FD, DFA and energy filters in order."""
    stats = [
        _stats(0, variance=0.0),
        _stats(1, kfd=1.0),  # 1.0 / 1.5 below 0.85
        _stats(2, alpha=1.2),
        _stats(3, alpha=0.75),  # open lower bound
        _stats(4, alpha=1.0, energy=2.0),  # closed upper bound
        _stats(5, energy=3.0),
        _stats(6, energy=0.5),
    ]
    cfg = SelectionConfig(max_regions=2, dfa_mode="absolute")
    assert select_regions(stats, cfg) == [4, 5]
    cfg = SelectionConfig(max_regions=32, dfa_mode="absolute")
    assert select_regions(stats, cfg) == [4, 5, 6]



def test_select_regions_relative_dfa():
    """Test that DFA exponents are compared against the window maximum."""
    stats = [
        _stats(0, alpha=1.2),
        _stats(1, alpha=1.19),
        _stats(2, alpha=0.84),  # 0.7 of the maximum
        _stats(3, alpha=1.0),
        _stats(4, alpha=float("nan")),
    ]
    assert select_regions(stats, SelectionConfig()) == [0, 1, 3]
    assert select_regions(stats, SelectionConfig(dfa_mode="absolute")) == [2, 3]


def _pulse_and_noise_stats(scale=1.0):
    t = np.arange(300) / 30.0
    rng = np.random.default_rng(11)
    stats = []
    for region_id in range(12):
        noise = rng.standard_normal(300)
        if region_id % 3 == 0:
            amp = 1.0 + region_id / 10.0
            green = amp * np.sin(2 * np.pi * 1.2 * t) + 0.05 * noise
        else:
            green = noise
        green = scale * green
        stats.append(compute_region_stats(RgbTrace(green, green, green, 30.0, region_id)))
    return stats


def test_select_regions_keeps_pulse_over_noise():
    """Test that periodic regions pass the screens and noise regions do not."""
    stats = _pulse_and_noise_stats()
    assert select_regions(stats, SelectionConfig()) == [0, 3, 6, 9]


def test_select_regions_scale_invariant():
    """Test that scaling every trace leaves the selection unchanged."""
    for k in (1, 2, 4, 32):
        cfg = SelectionConfig(max_regions=k)
        assert select_regions(_pulse_and_noise_stats(3.7), cfg) == select_regions(
            _pulse_and_noise_stats(), cfg
        )


def test_select_regions_monotone_in_budget():
    """Test that a larger region budget only adds regions."""
    rng = np.random.default_rng(5)
    stats = [
        _stats(i, alpha=float(rng.uniform(0.9, 1.0)), energy=float(rng.uniform(0.1, 10.0)))
        for i in range(40)
    ]
    previous = set()
    for k in range(1, 41):
        chosen = set(select_regions(stats, SelectionConfig(max_regions=k)))
        assert len(chosen) == k
        assert previous <= chosen
        previous = chosen

def test_select_regions_absolute_kfd():
    """Test the absolute Katz FD threshold."""
    stats = [_stats(0, kfd=1.2), _stats(1, kfd=0.8)]
    cfg = SelectionConfig(kfd_mode="absolute", kfd_threshold=1.0)
    assert select_regions(stats, cfg) == [0]


def test_select_regions_fallback_and_disabled():
    """Test the highest-energy fallback and disabled selection."""
    stats = [_stats(0, alpha=2.0, energy=1.0), _stats(1, alpha=2.0, energy=5.0)]
    assert select_regions(stats, SelectionConfig(dfa_mode="absolute")) == [1]
    assert select_regions(stats, SelectionConfig(enabled=False)) == [0, 1]
    with pytest.raises(InvalidInputError):
        select_regions([], SelectionConfig())


def test_select_regions_energy_ties_prefer_low_id():
    """Test that equal energies keep the lowest region ids."""
    stats = [_stats(i, energy=1.0) for i in (5, 2, 8)]
    assert select_regions(stats, SelectionConfig(max_regions=2)) == [2, 5]


def test_aggregate_regions(make_sine):
    """Test aggregation to unit variance and the flat case."""
    x = make_sine(1.2, duration_s=10.0).samples
    agg, flat = aggregate_regions({0: x, 1: 2 * x}, [0, 1], 30.0)
    assert not flat
    assert agg.samples.std() == pytest.approx(1.0)
    assert np.corrcoef(agg.samples, x)[0, 1] == pytest.approx(1.0)

    agg, flat = aggregate_regions({0: x, 1: -x}, [0, 1], 30.0)
    assert flat
    assert np.all(agg.samples == 0)

    with pytest.raises(InvalidInputError):
        aggregate_regions({0: x}, [], 30.0)
    with pytest.raises(InvalidInputError):
        aggregate_regions({0: x, 1: x[:10]}, [0, 1], 30.0)
