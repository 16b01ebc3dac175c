"""
Report utilities for facepulse.

This module provides dataset-level aggregation of per-video metrics and the
CSV, JSON and text-table report outputs.
"""

import json
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd

from ..utils.exceptions import InvalidInputError
from ..utils.logging import get_logger
from .metrics import MetricsReport

logger = get_logger()

GroupBy = Literal["none", "scenario", "grid_n", "method", "pipeline"]

REPORT_VERSION = "1"
VIDEO_COLUMNS = [
    "video_id",
    "scenario",
    "method",
    "pipeline",
    "grid_n",
    "regions",
    "mae_bpm",
    "mae_sd_bpm",
    "rmse_bpm",
    "pcc",
    "pcc_defined",
    "n_windows",
    "lag_s",
    "aligned",
]
TABLE_COLUMNS = ["MAE ± SD", "PCC", "RMSE"]


@dataclass(frozen=True)
class AggregateReport:
    """Metrics of one group of videos.

    ``mae_sd_bpm`` is the population SD of the per-video MAEs, ``rmse_bpm``
    the mean of per-video RMSEs and ``pcc_median`` the median of the defined
    per-video PCCs (None if none is defined).
    """

    group_by: str
    group: str
    n_videos: int
    mae_bpm: float
    mae_sd_bpm: float
    rmse_bpm: float
    pcc_median: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def reports_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """Per-video reports as a DataFrame with the fixed column order."""
    return pd.DataFrame([r.to_dict() for r in reports], columns=VIDEO_COLUMNS)


def aggregate_dataset(
    reports: Sequence[MetricsReport], group_by: GroupBy = "none"
) -> List[AggregateReport]:
    """Aggregate per-video reports, optionally per group.

    Args:
        reports: Per-video reports (non-empty)
        group_by: "none", "scenario", "grid_n", "method" or "pipeline"

    Returns:
        One AggregateReport per group, sorted by label (grid sizes numerically)

    Raises:
        InvalidInputError: If reports is empty or group_by is unknown
    """
    if not reports:
        raise InvalidInputError("aggregate_dataset needs at least one report")
    if group_by not in ("none", "scenario", "grid_n", "method", "pipeline"):
        raise InvalidInputError(f"Unknown grouping: {group_by}")

    df = reports_frame(reports)
    if group_by == "none":
        df["group"] = "all"
        df["order"] = 0.0
    elif group_by == "grid_n":
        # Grid sizes read "6x6"; layouts without a grid fall back to their region label
        df["group"] = [
            f"{int(n)}x{int(n)}" if pd.notna(n) else (regions or "none")
            for n, regions in zip(df["grid_n"], df["regions"])
        ]
        df["order"] = df["grid_n"].astype(float).fillna(np.inf)
    else:
        df["group"] = df[group_by].astype(str)
        df["order"] = 0.0

    rows = []
    groups = df.groupby(["order", "group"], sort=True)
    for (_, label), part in groups:
        pcc = part.loc[part["pcc_defined"], "pcc"].astype(float)
        rows.append(
            AggregateReport(
                group_by=group_by,
                group=str(label),
                n_videos=int(len(part)),
                mae_bpm=float(part["mae_bpm"].mean()),
                mae_sd_bpm=float(part["mae_bpm"].std(ddof=0)),
                rmse_bpm=float(part["rmse_bpm"].mean()),
                pcc_median=float(np.median(pcc)) if len(pcc) else None,
            )
        )
    return rows


def table_frame(aggregates: Sequence[AggregateReport]) -> pd.DataFrame:
    """Summary table with the columns "MAE ± SD", "PCC" and "RMSE"."""
    data = {
        "MAE ± SD": [f"{a.mae_bpm:.2f} ± {a.mae_sd_bpm:.2f}" for a in aggregates],
        "PCC": ["n/a" if a.pcc_median is None else f"{a.pcc_median:.2f}" for a in aggregates],
        "RMSE": [f"{a.rmse_bpm:.2f}" for a in aggregates],
    }
    return pd.DataFrame(data, index=[a.group for a in aggregates], columns=TABLE_COLUMNS)


def render_table(aggregates: Sequence[AggregateReport]) -> str:
    return table_frame(aggregates).to_string()


def write_reports(
    reports: Sequence[MetricsReport],
    out_dir: str,
    run_meta: Optional[Dict[str, Any]] = None,
    group_by: GroupBy = "none",
    stem: str = "metrics",
) -> Dict[str, str]:
    """Write the per-video CSV, the JSON summary and the text table.

    Args:
        reports: Per-video reports
        out_dir: Output directory (created if missing)
        run_meta: Extra run information stored in the JSON summary
        group_by: Grouping of the summary
        stem: File name stem

    Returns:
        Mapping of output kind ("csv", "json", "table") to file path
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, f"{stem}.csv"),
        "json": os.path.join(out_dir, f"{stem}_summary.json"),
        "table": os.path.join(out_dir, f"{stem}_table.txt"),
    }

    reports_frame(reports).to_csv(paths["csv"], index=False)

    aggregates = aggregate_dataset(reports, group_by) if reports else []
    summary = {
        "report_version": REPORT_VERSION,
        "sd_definition": "population SD of per-window errors (video) / per-video MAE (group)",
        "n_videos": len(reports),
        "group_by": group_by,
        "groups": [a.to_dict() for a in aggregates],
        "run": run_meta or {},
    }
    with open(paths["json"], "w") as f:
        json.dump(summary, f, indent=2, default=str)

    with open(paths["table"], "w") as f:
        f.write(render_table(aggregates) if aggregates else "No videos evaluated\n")
        f.write("\n")

    logger.info(f"Wrote reports for {len(reports)} videos to {out_dir}")
    return paths
