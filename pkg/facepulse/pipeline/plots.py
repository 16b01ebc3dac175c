"""
Plotting utilities for facepulse.

This module provides the figures of an evaluation run: heart-rate overlays
of extracted and reference series per video, and MAE box plots per method.
"""

import glob
import os
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ..evaluation.reports import VIDEO_COLUMNS  # noqa: E402
from ..utils.exceptions import DataError  # noqa: E402
from ..utils.logging import get_logger  # noqa: E402
from .evaluate import HR_DIR  # noqa: E402

logger = get_logger()

PLOT_DIR = "plots"
DPI = 120
EXTRACTED_COLOR = "tab:red"
REFERENCE_COLOR = "tab:blue"
LOG_FLOOR_BPM = 1e-2

# PNG metadata carries the matplotlib version by default
_METADATA = {"Software": None}


def _save(fig: plt.Figure, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_hr_overlay(frame: pd.DataFrame, title: str, path: str) -> str:
    """Plot extracted (red) and reference (blue) heart rate over time.

    The extracted series is shifted by the alignment lag stored in the frame.

    Args:
        frame: Columns time_s, extracted_bpm, reference_bpm and optionally lag_s
        title: Figure title
        path: Output PNG path

    Returns:
        The written path
    """
    lag = float(frame["lag_s"].iloc[0]) if "lag_s" in frame and len(frame) else 0.0
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(frame["time_s"], frame["reference_bpm"], color=REFERENCE_COLOR, label="reference")
    ax.plot(
        frame["time_s"] + lag, frame["extracted_bpm"], color=EXTRACTED_COLOR, label="extracted"
    )
    ax.set_xlabel("time (s)")
    ax.set_ylabel("heart rate (bpm)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_mae_boxplot(metrics: pd.DataFrame, path: str, log_scale: bool = False) -> str:
    """Box plot of per-video MAE for each method.

    Args:
        metrics: Per-video report table (columns method, mae_bpm)
        path: Output PNG path
        log_scale: Logarithmic MAE axis (values floored at 0.01 bpm)

    Returns:
        The written path
    """
    methods = sorted(metrics["method"].astype(str).unique())
    data = []
    for method in methods:
        values = metrics.loc[metrics["method"].astype(str) == method, "mae_bpm"].astype(float)
        data.append(values.clip(lower=LOG_FLOOR_BPM) if log_scale else values)

    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(methods) + 2), 4))
    ax.boxplot(data)
    ax.set_xticks(range(1, len(methods) + 1))
    ax.set_xticklabels(methods)
    ax.set_ylabel("MAE (bpm)")
    if log_scale:
        ax.set_yscale("log")
    ax.grid(True, axis="y", alpha=0.3)
    return _save(fig, path)


def run_plots(run_dir: str, log_scale: bool = False, out_dir: Optional[str] = None) -> List[str]:
    """Render the figures of a completed evaluation run.

    One overlay per (video, configuration) heart-rate pair and one MAE box plot.
    File names derive from the run outputs only, so re-running reproduces them.

    Args:
        run_dir: Directory written by run_evaluate
        log_scale: Logarithmic MAE axis in the box plot
        out_dir: Figure directory (defaults to <run_dir>/plots)

    Returns:
        Paths of the written figures

    Raises:
        DataError: If the directory holds no evaluation outputs
    """
    metrics_path = os.path.join(run_dir, "metrics.csv")
    pair_files = sorted(glob.glob(os.path.join(run_dir, HR_DIR, "*.csv")))
    if not os.path.isfile(metrics_path) and not pair_files:
        raise DataError(f"No evaluation outputs in {run_dir}")

    out_dir = out_dir or os.path.join(run_dir, PLOT_DIR)
    os.makedirs(out_dir, exist_ok=True)
    written = []

    for pair_file in pair_files:
        stem = os.path.splitext(os.path.basename(pair_file))[0]
        frame = pd.read_csv(pair_file)
        written.append(plot_hr_overlay(frame, stem, os.path.join(out_dir, f"{stem}.png")))

    if os.path.isfile(metrics_path):
        metrics = pd.read_csv(metrics_path)
        missing = {"method", "mae_bpm"} - set(metrics.columns)
        if missing:
            raise DataError(
                f"{metrics_path} lacks columns {sorted(missing)} (expected {VIDEO_COLUMNS})"
            )
        if len(metrics):
            name = "mae_boxplot_log.png" if log_scale else "mae_boxplot.png"
            written.append(plot_mae_boxplot(metrics, os.path.join(out_dir, name), log_scale))

    if not written:
        raise DataError(f"No evaluation outputs in {run_dir}")
    logger.info(f"Wrote {len(written)} figures to {out_dir}")
    return written
