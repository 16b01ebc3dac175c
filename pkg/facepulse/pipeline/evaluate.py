"""
Dataset evaluation for facepulse.

This module provides the evaluation runner: every video of a dataset
descriptor goes through each pipeline configuration, its heart-rate series
is aligned with the reference series and compared, and the per-video and
aggregate reports are written to the run directory.
"""

import os
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from slugify import slugify

from ..evaluation.alignment import AlignmentParams, dataset_lag, estimate_alignment
from ..evaluation.metrics import MetricsReport, compute_metrics
from ..evaluation.reports import GroupBy, write_reports
from ..facegeom.mesh import CanonicalMesh, load_mesh
from ..io.datasets import entry_paths, load_dataset
from ..io.frames import load_frames
from ..io.landmarks import load_landmarks
from ..io.reference import load_reference
from ..spectral.heartrate import HrSeries
from ..spectral.reference import reference_hr
from ..utils.config import build_pipeline_config
from ..utils.exceptions import FacePulseError, NoAlignmentError
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map_with_failures
from ..utils.schemas import (
    DatasetDescriptor,
    EvaluationConfig,
    PipelineConfig,
    ReferenceConfig,
    VideoEntry,
)
from .extract import (
    PATCH_MODES,
    ExtractResult,
    PreparedVideo,
    VideoInput,
    run_extract,
    save_extract,
)

logger = get_logger()

SWEEP_GRID_SIZES = tuple(range(6, 12))
SWEEP_METHOD = "chrom"
HR_DIR = "hr"
SIGNAL_DIR = "signals"
EXCLUSIONS_FILE = "exclusions.csv"


def regions_label(cfg: PipelineConfig) -> str:
    """Short description of the region layout of a configuration."""
    if cfg.pipeline == "fixed_crop":
        return "crop"
    if cfg.pipeline == "improved":
        return "skin"
    if cfg.region_mode == "grid" and cfg.pipeline == "multi_region":
        return f"{cfg.selection.grid_n}x{cfg.selection.grid_n}"
    if cfg.region_mode == "grid":
        return "face"
    return cfg.region_mode


def config_label(cfg: PipelineConfig) -> str:
    return slugify(f"{cfg.pipeline}-{cfg.method}-{regions_label(cfg)}")


def config_matrix(
    base: PipelineConfig,
    methods: Optional[Sequence[str]] = None,
    pipelines: Optional[Sequence[str]] = None,
    grid_sweep: bool = False,
    patch_sweep: bool = False,
) -> List[PipelineConfig]:
    """Expand a base configuration into the list of configurations to run.

    Args:
        base: Base pipeline configuration
        methods: Methods to run (the base method when None)
        pipelines: Pipelines to run (the base pipeline when None)
        grid_sweep: Run the multi-region pipeline on grids 6x6 to 11x11 instead
        patch_sweep: Run the multi-region pipeline on the forehead, cheeks and
            combined patches (after the grids when both are set)

    Returns:
        Validated configurations in run order

    Raises:
        ValidationError: If a combination is invalid (e.g. 2sr on an unnormalized pipeline)
    """
    if grid_sweep or patch_sweep:
        configs = []
        for method in methods or [SWEEP_METHOD]:
            if grid_sweep:
                configs.extend(
                    build_pipeline_config(
                        base,
                        pipeline="multi_region",
                        method=method,
                        region_mode="grid",
                        selection={"grid_n": n},
                    )
                    for n in SWEEP_GRID_SIZES
                )
            if patch_sweep:
                configs.extend(
                    build_pipeline_config(
                        base, pipeline="multi_region", method=method, region_mode=mode
                    )
                    for mode in PATCH_MODES
                )
        return configs

    return [
        build_pipeline_config(base, pipeline=p, method=m)
        for p in pipelines or [base.pipeline]
        for m in methods or [base.method]
    ]


def default_grouping(
    configs: Sequence[PipelineConfig], grid_sweep: bool = False, patch_sweep: bool = False
) -> GroupBy:
    """Summary grouping that separates the configurations of a run."""
    if grid_sweep or patch_sweep:
        return "grid_n"
    if len({c.method for c in configs}) > 1:
        return "method"
    if len({c.pipeline for c in configs}) > 1:
        return "pipeline"
    return "none"


@dataclass
class RunItem:
    """One (video, configuration) pair that produced both heart-rate series."""

    video_id: str
    scenario: str
    cfg: PipelineConfig
    result: ExtractResult
    reference: HrSeries
    alignment: AlignmentParams

    @property
    def label(self) -> str:
        return config_label(self.cfg)


@dataclass
class VideoOutcome:
    video_id: str
    items: List[RunItem] = field(default_factory=list)
    failures: List[Tuple[str, str]] = field(default_factory=list)


@dataclass
class EvaluationRun:
    """Outcome of an evaluation run.

    Attributes:
        reports: One report per (video, configuration)
        exclusions: (video id, configuration label, reason) per excluded pair
        paths: Report files written
        out_dir: Run directory
    """

    reports: List[MetricsReport]
    exclusions: List[Tuple[str, str, str]]
    paths: Dict[str, str]
    out_dir: str

    @property
    def partial(self) -> bool:
        return bool(self.exclusions)


def load_video(descriptor: DatasetDescriptor, entry: VideoEntry) -> VideoInput:
    """Read the frames and landmarks of a dataset entry.

    Raises:
        DataError: If a file is missing or malformed
    """
    paths = entry_paths(descriptor, entry)
    sequence = load_frames(paths.frames)
    landmarks = load_landmarks(paths.landmarks, n_frames=len(sequence))
    return VideoInput(entry.video_id, sequence.frames, sequence.fs, landmarks)


def align_series(
    ref: HrSeries, est: HrSeries, eval_cfg: EvaluationConfig, override_s: Optional[float] = None
) -> AlignmentParams:
    """Lag between reference and extracted series, or zero lag flagged as unaligned."""
    if override_s is not None:
        return AlignmentParams(
            lag_s=override_s,
            scale_mode=eval_cfg.scale_mode,
            max_lag_s=max(eval_cfg.max_lag_s, abs(override_s)),
        )
    try:
        return estimate_alignment(
            ref,
            est,
            max_lag_s=eval_cfg.max_lag_s,
            min_common=eval_cfg.min_common_windows,
            scale_mode=eval_cfg.scale_mode,
            min_sd_bpm=eval_cfg.min_envelope_sd_bpm,
        )
    except NoAlignmentError as e:
        logger.warning(f"{e}; metrics computed unaligned")
        return AlignmentParams(
            scale_mode=eval_cfg.scale_mode, max_lag_s=eval_cfg.max_lag_s, aligned=False
        )


def evaluate_video(
    entry: VideoEntry,
    descriptor: DatasetDescriptor,
    configs: Sequence[PipelineConfig],
    eval_cfg: EvaluationConfig,
    ref_cfg: ReferenceConfig,
    mesh: Optional[CanonicalMesh] = None,
) -> VideoOutcome:
    """Run every configuration on one video and pair it with the reference series.

    Loading failures propagate (the whole video is excluded); failures of a
    single configuration are recorded in the outcome.
    """
    video = load_video(descriptor, entry)
    paths = entry_paths(descriptor, entry)
    reference = load_reference(
        paths.reference, entry.reference_kind, entry.reference_fs, entry.ecg_channel
    )
    prepared = PreparedVideo(video, mesh)
    outcome = VideoOutcome(entry.video_id)
    references: Dict[Any, HrSeries] = {}

    for cfg in configs:
        try:
            if cfg.spectral not in references:
                references[cfg.spectral] = reference_hr(
                    reference, entry.reference_kind, cfg.spectral, ref_cfg, target_fs=video.fs
                )
            ref_hr = references[cfg.spectral]
            result = run_extract(video, cfg, prepared=prepared)
            alignment = align_series(ref_hr, result.hr, eval_cfg, descriptor.alignment_override_s)
        except FacePulseError as e:
            logger.error(f"{entry.video_id} [{config_label(cfg)}]: {e}")
            outcome.failures.append((config_label(cfg), str(e)))
            continue
        outcome.items.append(
            RunItem(entry.video_id, entry.scenario, cfg, result, ref_hr, alignment)
        )
    return outcome


def _median_lags(
    items: Sequence[RunItem], eval_cfg: EvaluationConfig
) -> Dict[str, AlignmentParams]:
    """Dataset-level lag per configuration from the videos that aligned."""
    lags: Dict[str, List[float]] = {}
    for item in items:
        if item.alignment.aligned:
            lags.setdefault(item.label, []).append(item.alignment.lag_s)
    result = {}
    for label, values in lags.items():
        lag = dataset_lag(values)
        step = next(i.result.hr.step_s for i in items if i.label == label) or 1.0
        lag = float(np.round(lag / step) * step)
        logger.info(f"Dataset lag for {label}: {lag:+.1f} s (median of {len(values)} videos)")
        result[label] = AlignmentParams(
            lag_s=lag, scale_mode=eval_cfg.scale_mode, max_lag_s=eval_cfg.max_lag_s
        )
    return result


def write_hr_pair(item: RunItem, out_dir: str) -> str:
    """Write the extracted and reference heart-rate series of one item side by side."""
    est = item.result.hr.to_frame().rename(
        columns={"bpm": "extracted_bpm", "valid": "extracted_valid"}
    )
    ref = item.reference.to_frame().rename(
        columns={"bpm": "reference_bpm", "valid": "reference_valid"}
    )
    frame = pd.merge(est, ref, on="time_s", how="outer").sort_values("time_s")
    frame["lag_s"] = item.alignment.lag_s
    path = os.path.join(out_dir, HR_DIR, f"{slugify(item.video_id)}-{item.label}.csv")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.6f")
    return path


def run_evaluate(
    dataset: Union[str, DatasetDescriptor],
    configs: Sequence[PipelineConfig],
    out_dir: str,
    eval_cfg: Optional[EvaluationConfig] = None,
    ref_cfg: Optional[ReferenceConfig] = None,
    jobs: int = 1,
    group_by: Optional[GroupBy] = None,
    mesh: Optional[CanonicalMesh] = None,
    run_meta: Optional[Dict[str, Any]] = None,
    save_signals: bool = True,
) -> EvaluationRun:
    """Evaluate pipeline configurations on every video of a dataset.

    Args:
        dataset: Descriptor path or loaded descriptor
        configs: Pipeline configurations to run on each video
        out_dir: Run directory for reports, heart-rate pairs and signals
        eval_cfg: Alignment settings
        ref_cfg: Reference gap settings
        jobs: Videos processed in parallel
        group_by: Summary grouping (derived from the configurations when None)
        mesh: Canonical mesh (the packaged mesh when None)
        run_meta: Extra information stored in the JSON summary
        save_signals: Also write each extracted signal and its diagnostics

    Returns:
        EvaluationRun with the reports and the excluded (video, configuration) pairs

    Raises:
        ConfigError: If the descriptor cannot be read
    """
    descriptor = load_dataset(dataset, strict=False) if isinstance(dataset, str) else dataset
    eval_cfg = eval_cfg or EvaluationConfig()
    ref_cfg = ref_cfg or ReferenceConfig()
    mesh = mesh or load_mesh()
    group_by = group_by or default_grouping(configs)
    labels = [config_label(c) for c in configs]

    logger.info(
        f"Evaluating {len(descriptor.entries)} videos of {descriptor.name} with "
        f"{len(configs)} configurations ({jobs} jobs)"
    )
    worker = partial(
        evaluate_video,
        descriptor=descriptor,
        configs=list(configs),
        eval_cfg=eval_cfg,
        ref_cfg=ref_cfg,
        mesh=mesh,
    )
    outcomes, failures = parallel_map_with_failures(worker, descriptor.entries, max_workers=jobs)

    exclusions: List[Tuple[str, str, str]] = []
    for index, error in failures:
        video_id = descriptor.entries[index].video_id
        exclusions.extend((video_id, label, str(error)) for label in labels)
    items: List[RunItem] = []
    for outcome in outcomes:
        if outcome is None:
            continue
        items.extend(outcome.items)
        exclusions.extend((outcome.video_id, label, reason) for label, reason in outcome.failures)

    if eval_cfg.lag_mode == "dataset" and descriptor.alignment_override_s is None:
        shared = _median_lags(items, eval_cfg)
        for item in items:
            if item.label in shared:
                item.alignment = shared[item.label]

    reports: List[MetricsReport] = []
    for item in items:
        try:
            reports.append(
                compute_metrics(
                    item.reference,
                    item.result.hr,
                    item.alignment,
                    video_id=item.video_id,
                    scenario=item.scenario,
                    method=item.cfg.method,
                    pipeline=item.cfg.pipeline,
                    grid_n=item.result.grid_n,
                    regions=regions_label(item.cfg),
                )
            )
        except FacePulseError as e:
            logger.error(f"{item.video_id} [{item.label}]: {e}")
            exclusions.append((item.video_id, item.label, str(e)))
            continue
        write_hr_pair(item, out_dir)
        if save_signals:
            save_extract(item.result, os.path.join(out_dir, SIGNAL_DIR))

    meta = {
        "dataset": descriptor.name,
        "configurations": labels,
        "lag_mode": eval_cfg.lag_mode,
        "alignment_override_s": descriptor.alignment_override_s,
        "n_exclusions": len(exclusions),
        **(run_meta or {}),
    }
    paths = write_reports(reports, out_dir, run_meta=meta, group_by=group_by)
    paths["exclusions"] = write_exclusions(exclusions, out_dir)

    if exclusions:
        logger.warning(f"{len(exclusions)} (video, configuration) pairs excluded")
    logger.info(f"Evaluation finished: {len(reports)} reports in {out_dir}")
    return EvaluationRun(reports, exclusions, paths, out_dir)


def write_exclusions(exclusions: Sequence[Tuple[str, str, str]], out_dir: str) -> str:
    path = os.path.join(out_dir, EXCLUSIONS_FILE)
    os.makedirs(out_dir, exist_ok=True)
    pd.DataFrame(list(exclusions), columns=["video_id", "configuration", "reason"]).to_csv(
        path, index=False
    )
    return path
