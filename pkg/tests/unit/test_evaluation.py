"""
Tests for alignment, metrics and reports.
"""

import json

import numpy as np
import pandas as pd
import pytest

from facepulse.evaluation.alignment import (
    AlignmentParams,
    apply_alignment,
    dataset_lag,
    estimate_alignment,
)
from facepulse.evaluation.metrics import MetricsReport, compute_metrics, pearson
from facepulse.evaluation.reports import (
    TABLE_COLUMNS,
    VIDEO_COLUMNS,
    aggregate_dataset,
    render_table,
    write_reports,
)
from facepulse.spectral.heartrate import series_from_estimates
from facepulse.utils.exceptions import (
    InsufficientDataError,
    InvalidInputError,
    NoAlignmentError,
)


def _series(values, valid=None):
    times = np.arange(len(values), dtype=float)
    estimates = [
        v if valid is None or valid[i] else None for i, v in enumerate(values)
    ]
    return series_from_estimates(times, estimates)


def _envelope(n=60):
    k = np.arange(n)
    return 75.0 + 10.0 * np.sin(2 * np.pi * k / 15.0) + 0.2 * k


def _report(video_id, mae, rmse=None, pcc=0.9, **meta):
    return MetricsReport(
        video_id=video_id,
        mae_bpm=mae,
        mae_sd_bpm=0.5,
        rmse_bpm=mae + 1.0 if rmse is None else rmse,
        pcc=pcc,
        n_windows=20,
        **meta,
    )


def test_estimate_alignment_recovers_delay():
    """Test that a series delayed by two windows is aligned with lag -2 s."""
    base = _envelope()
    ref = _series(base[5:55])
    est = _series(base[3:53])
    align = estimate_alignment(ref, est, max_lag_s=3.0, min_common=10)
    assert align.lag_s == -2.0
    assert align.aligned
    r, e = apply_alignment(ref, est, align)
    assert np.allclose(r, e)


def test_estimate_alignment_prefers_zero_lag():
    """Test that identical series keep zero lag."""
    ref = _series(_envelope(40))
    assert estimate_alignment(ref, ref).lag_s == 0.0


def test_estimate_alignment_flat_envelopes_keep_zero_lag():
    """Test that near-constant envelopes give zero lag instead of chasing noise."""
    rng = np.random.default_rng(2)
    ref = _series(np.full(30, 70.0))
    est = _series(70.0 + rng.normal(0.0, 0.05, 30))
    assert estimate_alignment(ref, est).lag_s == 0.0
    jitter = _series(96.0 + rng.normal(0.0, 0.1, 30))
    align = estimate_alignment(jitter, _series(96.0 + rng.normal(0.0, 0.1, 30)))
    assert align.lag_s == 0.0
    assert align.aligned


def test_estimate_alignment_near_tie_prefers_small_lag():
    """Test that lags within the tie margin resolve to the smallest shift."""
    slow = 80.0 + 0.5 * np.arange(40)  # a ramp correlates almost equally at every shift
    ref = _series(slow)
    assert estimate_alignment(ref, ref).lag_s == 0.0
    delayed = _series(np.concatenate([[80.0], slow[:-1]]))
    assert estimate_alignment(ref, delayed).lag_s == 0.0
    assert estimate_alignment(ref, delayed, tie_tol=1e-6).lag_s == -1.0


def test_estimate_alignment_failures():
    """Test alignment errors for short overlaps and mismatched grids."""
    short = _series(_envelope(8))
    with pytest.raises(NoAlignmentError):
        estimate_alignment(short, short, min_common=10)
    coarse = series_from_estimates(np.arange(30) * 2.0, list(_envelope(30)))
    with pytest.raises(InvalidInputError):
        estimate_alignment(_series(_envelope(30)), coarse)


def test_alignment_params_bound():
    """Test that a lag beyond the search bound is rejected."""
    with pytest.raises(InvalidInputError):
        AlignmentParams(lag_s=5.0, max_lag_s=3.0)


def test_znorm_scaling():
    """Test dynamic-range alignment of the paired values."""
    ref = _series(_envelope(30))
    est = _series(2.0 * _envelope(30) + 5.0)
    r, e = apply_alignment(ref, est, AlignmentParams(scale_mode="znorm"))
    assert np.allclose(r, e)


def test_dataset_lag_median():
    """Test the dataset-level lag."""
    assert dataset_lag([-1.0, 0.0, -2.0, -1.0, 3.0]) == -1.0
    with pytest.raises(NoAlignmentError):
        dataset_lag([])



@pytest.mark.parametrize(
    "mae,rmse,pcc",
    [(-0.1, 1.0, 0.5), (2.0, 1.0, 0.5), (1.0, 2.0, 1.5), (float("nan"), 1.0, None)],
)
def test_metrics_report_rejects_inconsistent_values(mae, rmse, pcc):
    """Test that impossible metric combinations raise instead of being stored."""
    with pytest.raises(InvalidInputError):
        _report("a", mae, rmse=rmse, pcc=pcc)
    assert _report("a", 1.0, rmse=1.0, pcc=None).mae_bpm == 1.0

def test_compute_metrics_values():
    """Test MAE, SD, RMSE and PCC on hand-checked values."""
    ref = _series([60.0, 70.0, 80.0, 90.0])
    est = _series([62.0, 68.0, 83.0, 90.0])
    report = compute_metrics(ref, est, video_id="v1", method="chrom")
    assert report.mae_bpm == pytest.approx(1.75)
    assert report.rmse_bpm == pytest.approx(np.sqrt(4.25))
    assert report.mae_sd_bpm == pytest.approx(np.sqrt(1.1875))
    assert report.pcc == pytest.approx(np.corrcoef([60, 70, 80, 90], [62, 68, 83, 90])[0, 1])
    assert report.n_windows == 4
    assert report.method == "chrom"


def test_compute_metrics_joint_validity():
    """Test that only jointly valid windows are compared."""
    ref = _series([60.0, 70.0, 80.0, 90.0, 100.0], valid=[True, False, True, True, True])
    est = _series([60.0, 70.0, 80.0, 95.0, 100.0], valid=[True, True, True, False, True])
    report = compute_metrics(ref, est)
    assert report.n_windows == 3
    assert report.mae_bpm == 0.0


def test_compute_metrics_edge_cases():
    """Test the undefined PCC and the minimum window count."""
    report = compute_metrics(_series([70.0] * 5), _series([72.0] * 5))
    assert report.pcc is None
    assert not report.to_dict()["pcc_defined"]
    assert report.mae_bpm == pytest.approx(2.0)
    with pytest.raises(InsufficientDataError):
        compute_metrics(_series([70.0, 71.0]), _series([70.0, 71.0]))
    assert pearson(np.ones(3), np.arange(3.0)) is None


def test_aggregate_none_and_method():
    """Test dataset aggregation overall and per method."""
    reports = [
        _report("a", 1.0, method="chrom"),
        _report("b", 3.0, method="chrom", pcc=None),
        _report("c", 2.0, method="pos", pcc=0.5),
    ]
    (overall,) = aggregate_dataset(reports)
    assert overall.n_videos == 3
    assert overall.mae_bpm == pytest.approx(2.0)
    assert overall.mae_sd_bpm == pytest.approx(np.std([1.0, 3.0, 2.0]))
    assert overall.rmse_bpm == pytest.approx(3.0)
    assert overall.pcc_median == pytest.approx(0.7)

    by_method = {a.group: a for a in aggregate_dataset(reports, "method")}
    assert by_method["chrom"].pcc_median == pytest.approx(0.9)
    assert by_method["pos"].n_videos == 1
    with pytest.raises(InvalidInputError):
        aggregate_dataset([])
    with pytest.raises(InvalidInputError):
        aggregate_dataset(reports, "colour")


def test_aggregate_grid_sizes_sorted_numerically():
    """Test grid labels, numeric order and patch layouts at the end."""
    reports = [
        _report("a", 1.0, grid_n=10, regions="10x10"),
        _report("a", 1.0, grid_n=6, regions="6x6"),
        _report("a", 1.0, regions="combined"),
        _report("a", 1.0, grid_n=9, regions="9x9"),
    ]
    groups = [a.group for a in aggregate_dataset(reports, "grid_n")]
    assert groups == ["6x6", "9x9", "10x10", "combined"]


def test_render_table_columns():
    """Test the summary table layout."""
    aggregates = aggregate_dataset([_report("a", 1.0, pcc=None)])
    table = render_table(aggregates)
    for column in TABLE_COLUMNS:
        assert column in table
    assert "n/a" in table
    assert "1.00 ± 0.00" in table


def test_write_reports(temp_dir):
    """Test the CSV, JSON and table outputs and their determinism."""
    reports = [_report("a", 1.0, method="omit"), _report("b", 2.0, method="omit")]
    paths = write_reports(reports, str(temp_dir), run_meta={"seed": 0}, group_by="method")
    df = pd.read_csv(paths["csv"])
    assert list(df.columns) == VIDEO_COLUMNS
    assert df["video_id"].tolist() == ["a", "b"]
    with open(paths["json"]) as f:
        summary = json.load(f)
    assert summary["n_videos"] == 2
    assert summary["groups"][0]["group"] == "omit"
    assert summary["run"] == {"seed": 0}

    first = {k: open(p, "rb").read() for k, p in paths.items()}
    write_reports(reports, str(temp_dir), run_meta={"seed": 0}, group_by="method")
    second = {k: open(p, "rb").read() for k, p in paths.items()}
    assert first == second


def test_write_reports_empty(temp_dir):
    """Test that an empty run still writes its files."""
    paths = write_reports([], str(temp_dir))
    with open(paths["table"]) as f:
        assert "No videos evaluated" in f.read()
