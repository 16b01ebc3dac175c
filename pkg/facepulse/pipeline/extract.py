"""
Extraction pipeline for facepulse.

This module provides the per-video pipeline: landmarks, face normalization,
region traces, filtering, RGB-to-pulse conversion, region selection,
aggregation and heart-rate estimation, for the four pipeline variants.
"""

import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from slugify import slugify

from ..dsp.filters import bandpass_fir, detrend, moving_average
from ..dsp.signals import Signal1D
from ..dsp.windows import window_length, window_starts
from ..facegeom.landmarks import LandmarkFrame, canonical_shape_85
from ..facegeom.masks import crop_box, skin_mask
from ..facegeom.mesh import CanonicalMesh, load_mesh
from ..facegeom.warp import NormalizedFaceStack, normalize_sequence
from ..regions.grid import RgbTrace, extract_traces, fixed_patches, grid_partition, masked_trace
from ..regions.quality import RegionStats, compute_region_stats
from ..regions.selection import aggregate_regions, select_regions
from ..rppg.base import PulseWindow, TraceMatrix
from ..rppg.registry import convert, get_method
from ..spectral.heartrate import HrSeries, estimate_hr, series_from_estimates
from ..utils.exceptions import (
    DegenerateFaceError,
    EmptyStackError,
    FacePulseError,
    InvalidInputError,
    PipelineError,
)
from ..utils.logging import get_logger
from ..utils.schemas import BandpassSpec, PipelineConfig

logger = get_logger()

PATCH_MODES = ("forehead", "cheeks", "combined")
REGION_COLUMNS = (
    "window_start",
    "region_id",
    "variance",
    "kfd",
    "dfa_alpha",
    "snr_db",
    "psd_energy",
    "selected",
)


@dataclass(frozen=True)
class VideoInput:
    """Frames and landmarks of one video."""

    video_id: str
    frames: np.ndarray
    fs: float
    landmarks: Sequence[Optional[LandmarkFrame]]

    def __len__(self) -> int:
        return int(self.frames.shape[0])


@dataclass(frozen=True)
class RegionLayout:
    """Regions a pipeline reads traces from.

    Attributes:
        traces: Mean RGB trace per region
        masks: Canonical pixel mask per region id (normalized pipelines only)
    """

    traces: List[RgbTrace]
    masks: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def ids(self) -> List[int]:
        return [t.region_id for t in self.traces]


@dataclass
class ExtractResult:
    """Output of one pipeline run on one video."""

    video_id: str
    method: str
    pipeline: str
    grid_n: Optional[int]
    signal: Signal1D
    hr: HrSeries
    diagnostics: pd.DataFrame
    flags: Tuple[str, ...] = ()
    regions: Optional[pd.DataFrame] = None

    @property
    def label(self) -> str:
        grid = f"-{self.grid_n}x{self.grid_n}" if self.grid_n else ""
        return slugify(f"{self.video_id}-{self.pipeline}-{self.method}{grid}")


@contextmanager
def stage(name: str, index: Optional[int] = None) -> Iterator[None]:
    """Re-raise module errors as PipelineError carrying the stage and index."""
    try:
        yield
    except PipelineError:
        raise
    except FacePulseError as e:
        raise PipelineError(name, str(e), index) from e


def _with_dc(samples: np.ndarray, dc: float) -> np.ndarray:
    return samples + dc


def filter_chain(signal: Signal1D, cfg: PipelineConfig) -> Signal1D:
    """Apply the configured filter chain (detrend, bandpass, moving average)."""
    for name in cfg.prefilters:
        if name == "detrend":
            signal = detrend(signal, cfg.detrend_method, cfg.detrend_lambda)
        elif name == "bandpass":
            signal = bandpass_fir(signal, cfg.bandpass)
        elif name == "moving_average":
            width = min(max(int(round(cfg.ma_width_s * signal.fs)), 1), len(signal))
            signal = moving_average(signal, width)
    return signal


def prefilter_trace(trace: RgbTrace, cfg: PipelineConfig) -> RgbTrace:
    """Filter each channel of a trace, keeping its temporal mean.

    The mean is restored after filtering so that mean-normalizing methods still
    see the skin colour.
    """
    rows = []
    for row in trace.matrix:
        filtered = filter_chain(Signal1D(row, trace.fs), cfg)
        rows.append(_with_dc(filtered.samples, float(row.mean())))
    return RgbTrace.from_matrix(np.vstack(rows), trace.fs, trace.region_id)


def stats_trace(trace: RgbTrace, bandpass: BandpassSpec) -> RgbTrace:
    """Detrended, band-passed copy of a trace used for region statistics."""
    rows = []
    for row in trace.matrix:
        signal = detrend(Signal1D(row, trace.fs))
        rows.append(bandpass_fir(signal, bandpass).samples)
    return RgbTrace.from_matrix(np.vstack(rows), trace.fs, trace.region_id)


class PreparedVideo:
    """Per-video cache of normalized faces, region traces and region statistics.

    Configurations that share a stage reuse its output, so sweeping methods
    or grid sizes over one video normalizes the face only once.
    """

    def __init__(
        self, video: VideoInput, mesh: Optional[CanonicalMesh] = None, max_workers: int = 1
    ):
        """Initialize the cache.

        Args:
            video: Frames and landmarks
            mesh: Canonical mesh (the packaged mesh when None)
            max_workers: Threads used for frame warping
        """
        self.video = video
        self.mesh = mesh or load_mesh()
        self.max_workers = max_workers
        self._stack: Optional[NormalizedFaceStack] = None
        self._layouts: Dict[tuple, RegionLayout] = {}
        self._filtered: Dict[tuple, List[RgbTrace]] = {}
        self._stats: Dict[tuple, List[List[RegionStats]]] = {}

    @property
    def stack(self) -> NormalizedFaceStack:
        if self._stack is None:
            with stage("normalize"):
                logger.info(f"{self.video.video_id}: normalizing {len(self.video)} frames")
                self._stack = normalize_sequence(
                    self.video.frames,
                    self.video.landmarks,
                    self.mesh,
                    self.video.fs,
                    max_workers=self.max_workers,
                )
                if self._stack.degenerate_frames:
                    logger.warning(
                        f"{self.video.video_id}: {self._stack.degenerate_frames} frames "
                        f"with collapsed triangles"
                    )
        return self._stack

    @staticmethod
    def _layout_key(cfg: PipelineConfig) -> tuple:
        grid = cfg.selection.grid_n if cfg.region_mode == "grid" else None
        return (cfg.pipeline, cfg.region_mode, grid)

    def layout(self, cfg: PipelineConfig) -> RegionLayout:
        key = self._layout_key(cfg)
        if key not in self._layouts:
            with stage("regions"):
                self._layouts[key] = self._build_layout(cfg)
        return self._layouts[key]

    def _build_layout(self, cfg: PipelineConfig) -> RegionLayout:
        if cfg.pipeline == "fixed_crop":
            return RegionLayout([self._fixed_crop_trace()])
        if cfg.pipeline == "improved":
            return RegionLayout([self._skin_polygon_trace()])

        stack = self.stack
        size = self.mesh.size
        mesh_mask = stack.mask

        if cfg.pipeline == "normalized_single" or cfg.region_mode == "face":
            if cfg.region_mode in PATCH_MODES:
                mask = np.zeros_like(mesh_mask)
                for box in fixed_patches(canonical_shape_85(size), cfg.region_mode):
                    mask[box.y0 : box.y1, box.x0 : box.x1] = True
                mask &= mesh_mask
            else:
                mask = mesh_mask
            return RegionLayout([masked_trace(stack.frames, mask, stack.fs, 0)], {0: mask})

        if cfg.region_mode == "grid":
            boxes = grid_partition(size, size, cfg.selection.grid_n)
        else:
            boxes = fixed_patches(canonical_shape_85(size), cfg.region_mode)
        masks = {}
        for box in boxes:
            mask = np.zeros_like(mesh_mask)
            mask[box.y0 : box.y1, box.x0 : box.x1] = True
            masks[box.id] = mask & mesh_mask
        return RegionLayout(extract_traces(stack, boxes), masks)

    def _usable_landmarks(self) -> List[Optional[LandmarkFrame]]:
        h, w = self.video.frames.shape[1:3]
        usable: List[Optional[LandmarkFrame]] = []
        for lm in self.video.landmarks:
            if lm is None:
                usable.append(None)
                continue
            try:
                skin_mask(lm, h, w)
                usable.append(lm)
            except DegenerateFaceError:
                usable.append(None)
        if not any(lm is not None for lm in usable):
            raise EmptyStackError("No frame has usable landmarks")
        return usable

    def _fixed_crop_trace(self) -> RgbTrace:
        """Single box fixed at the first valid frame, no tracking."""
        frames = self.video.frames
        first = next(lm for lm in self._usable_landmarks() if lm is not None)
        x0, y0, x1, y1 = crop_box(first, frames.shape[1], frames.shape[2])
        means = frames[:, y0:y1, x0:x1, :].mean(axis=(1, 2), dtype=np.float64)
        return RgbTrace.from_matrix(means.T, self.video.fs, 0)

    def _skin_polygon_trace(self) -> RgbTrace:
        """Per-frame landmark skin polygon on the unnormalized frame."""
        frames = self.video.frames
        h, w = frames.shape[1:3]
        usable = self._usable_landmarks()
        current = next(lm for lm in usable if lm is not None)
        means = np.empty((len(frames), 3))
        for i, frame in enumerate(frames):
            if usable[i] is not None:
                current = usable[i]
            mask = skin_mask(current, h, w)
            means[i] = frame[mask].mean(axis=0, dtype=np.float64)
        return RgbTrace.from_matrix(means.T, self.video.fs, 0)

    def method_traces(self, cfg: PipelineConfig) -> List[RgbTrace]:
        """Region traces as fed to the conversion method (pre-filtered if configured)."""
        layout = self.layout(cfg)
        if cfg.pre_post_filter == "post":
            return layout.traces
        key = (
            self._layout_key(cfg),
            cfg.prefilters,
            cfg.detrend_method,
            cfg.detrend_lambda,
            cfg.ma_width_s,
            cfg.bandpass,
        )
        if key not in self._filtered:
            with stage("filter"):
                self._filtered[key] = [prefilter_trace(t, cfg) for t in layout.traces]
        return self._filtered[key]

    def region_stats(
        self, cfg: PipelineConfig, spans: Sequence[Tuple[int, int]]
    ) -> List[List[RegionStats]]:
        """Region statistics over each (start, stop) span."""
        key = (
            self._layout_key(cfg),
            tuple(spans),
            cfg.selection.stats_channel,
            cfg.spectral.band,
            cfg.spectral.welch,
            cfg.bandpass,
        )
        if key not in self._stats:
            layout = self.layout(cfg)
            with stage("statistics"):
                filtered = [stats_trace(t, cfg.bandpass) for t in layout.traces]
            result = []
            for k, (start, stop) in enumerate(spans):
                with stage("statistics", k):
                    result.append(
                        [
                            compute_region_stats(
                                t.slice(start, stop),
                                cfg.selection.stats_channel,
                                cfg.spectral.band,
                                cfg.spectral.welch,
                            )
                            for t in filtered
                        ]
                    )
            self._stats[key] = result
        return self._stats[key]


@dataclass(frozen=True)
class WindowOutcome:
    samples: np.ndarray
    bpm: Optional[float]
    flat: bool
    selected: Tuple[int, ...]
    flags: Tuple[str, ...]


def _selection_spans(
    n: int, fs: float, starts: np.ndarray, length: int, selection_s: float
) -> List[Tuple[int, int]]:
    """Selection span centred on each analysis window, clipped to the signal."""
    sel = min(window_length(fs, selection_s), n)
    spans = []
    for s in starts:
        a = int(np.clip(s + length // 2 - sel // 2, 0, n - sel))
        spans.append((a, a + sel))
    return spans


def _convert_regions(
    cfg: PipelineConfig,
    prepared: PreparedVideo,
    traces: Dict[int, RgbTrace],
    ids: Sequence[int],
    start: int,
    stop: int,
) -> List[PulseWindow]:
    spec = get_method(cfg.method)
    layout = prepared.layout(cfg)
    if spec.needs_pixels and not layout.masks:
        raise InvalidInputError(
            f"Method '{spec.name}' needs a normalized pipeline, not {cfg.pipeline}"
        )
    outputs = []
    for region_id in ids:
        if spec.needs_pixels:
            window = prepared.stack.window(start, stop)
            outputs.append(
                convert(cfg.method, stack=window_with_mask(window, layout.masks[region_id]))
            )
        else:
            trace = traces[region_id].slice(start, stop)
            outputs.append(
                convert(
                    cfg.method,
                    trace=TraceMatrix(trace.matrix, trace.fs),
                    options=cfg.methods,
                    band=cfg.spectral.band,
                )
            )
    return outputs


def window_with_mask(stack: NormalizedFaceStack, mask: np.ndarray) -> NormalizedFaceStack:
    """Same frames with the pixel mask restricted to one region."""
    return NormalizedFaceStack(
        stack.frames, stack.fs, stack.validity, mask, stack.degenerate_frames
    )


def _combine(
    cfg: PipelineConfig, outputs: List[PulseWindow], ids: Sequence[int], fs: float
) -> Tuple[np.ndarray, bool, Tuple[str, ...]]:
    """Aggregate region pulses and apply the post filter."""
    flags = sorted({f for o in outputs for f in o.flags})
    usable = [(i, o) for i, o in zip(ids, outputs) if not o.flat]
    if not usable:
        return np.zeros(len(outputs[0])), True, tuple(flags)
    signal, flat = aggregate_regions({i: o.samples for i, o in usable}, [i for i, _ in usable], fs)
    if not flat and cfg.pre_post_filter in ("post", "both"):
        signal = filter_chain(signal, cfg)
        flat = float(signal.samples.var()) == 0.0
    return signal.samples, flat, tuple(flags)


def _select(
    cfg: PipelineConfig, layout: RegionLayout, stats: Optional[List[RegionStats]]
) -> List[int]:
    if stats is None:
        return layout.ids
    return select_regions(stats, cfg.selection)


def run_extract(
    video: VideoInput,
    cfg: PipelineConfig,
    out_dir: Optional[str] = None,
    prepared: Optional[PreparedVideo] = None,
    mesh: Optional[CanonicalMesh] = None,
) -> ExtractResult:
    """Run one pipeline configuration on one video.

    Args:
        video: Frames and landmarks
        cfg: Pipeline configuration
        out_dir: Directory for the signal, heart-rate and diagnostics CSVs (none written if None)
        prepared: Cache shared across configurations of the same video
        mesh: Canonical mesh (ignored when ``prepared`` is given)

    Returns:
        ExtractResult with the pulse signal, heart-rate series and diagnostics

    Raises:
        PipelineError: If any stage fails (message carries the stage and index)
    """
    fs = video.fs
    n = len(video)
    length = window_length(fs, cfg.spectral.win_s)
    starts = window_starts(n, fs, cfg.spectral.win_s, cfg.spectral.step_s)
    if starts.size == 0:
        raise PipelineError(
            "windowing",
            f"Video of {n / fs:.2f} s is shorter than the {cfg.spectral.win_s} s window",
        )

    prepared = prepared or PreparedVideo(video, mesh)
    layout = prepared.layout(cfg)
    traces = {t.region_id: t for t in prepared.method_traces(cfg)}
    use_selection = cfg.pipeline == "multi_region" and len(layout.traces) > 1
    grid_n = (
        cfg.selection.grid_n
        if cfg.pipeline == "multi_region" and cfg.region_mode == "grid"
        else None
    )

    logger.info(
        f"{video.video_id}: {cfg.pipeline}/{cfg.method}, {len(layout.traces)} regions, "
        f"{starts.size} windows ({cfg.windowing})"
    )

    outcomes: List[WindowOutcome] = []
    region_rows: List[Tuple[float, List[RegionStats], Sequence[int]]] = []
    if cfg.windowing == "pre_conversion":
        all_stats = (
            prepared.region_stats(
                cfg, _selection_spans(n, fs, starts, length, cfg.selection.window_s)
            )
            if use_selection
            else None
        )
        for k, s in enumerate(starts):
            stats = all_stats[k] if all_stats is not None else None
            with stage("selection", k):
                ids = _select(cfg, layout, stats)
            if stats is not None:
                region_rows.append((k * cfg.spectral.step_s, stats, ids))
            with stage("conversion", k):
                outputs = _convert_regions(cfg, prepared, traces, ids, int(s), int(s) + length)
            with stage("aggregation", k):
                samples, flat, flags = _combine(cfg, outputs, ids, fs)
            with stage("heart_rate", k):
                bpm = None if flat else estimate_hr(Signal1D(samples, fs), cfg.spectral)
            outcomes.append(WindowOutcome(samples, bpm, flat, tuple(ids), flags))
        signal = _overlap_add(outcomes, starts, n, fs)
    else:
        stats = prepared.region_stats(cfg, [(0, n)])[0] if use_selection else None
        with stage("selection"):
            ids = _select(cfg, layout, stats)
        if stats is not None:
            region_rows.append((0.0, stats, ids))
        with stage("conversion"):
            outputs = _convert_regions(cfg, prepared, traces, ids, 0, n)
        with stage("aggregation"):
            samples, flat, flags = _combine(cfg, outputs, ids, fs)
        signal = Signal1D(samples, fs)
        for k, s in enumerate(starts):
            window = samples[int(s) : int(s) + length]
            with stage("heart_rate", k):
                bpm = None if flat else estimate_hr(Signal1D(window, fs), cfg.spectral)
            outcomes.append(WindowOutcome(window, bpm, flat, tuple(ids), flags))

    hr = series_from_estimates(
        np.arange(starts.size) * cfg.spectral.step_s, [o.bpm for o in outcomes]
    )
    diagnostics = _diagnostics(outcomes, hr, len(layout.traces))
    all_flags = tuple(sorted({f for o in outcomes for f in o.flags}))
    result = ExtractResult(
        video_id=video.video_id,
        method=cfg.method,
        pipeline=cfg.pipeline,
        grid_n=grid_n,
        signal=signal,
        hr=hr,
        diagnostics=diagnostics,
        flags=all_flags,
        regions=_region_table(region_rows) if region_rows else None,
    )
    valid = int(hr.valid.sum())
    logger.info(f"{video.video_id}: {valid}/{len(hr)} windows with a heart-rate estimate")
    if out_dir:
        save_extract(result, out_dir)
    return result


def _overlap_add(
    outcomes: Sequence[WindowOutcome], starts: np.ndarray, n: int, fs: float
) -> Signal1D:
    total = np.zeros(n)
    count = np.zeros(n)
    for outcome, s in zip(outcomes, starts):
        stop = int(s) + outcome.samples.size
        total[int(s) : stop] += outcome.samples
        count[int(s) : stop] += 1
    return Signal1D(np.divide(total, count, out=np.zeros(n), where=count > 0), fs)


def _diagnostics(
    outcomes: Sequence[WindowOutcome], hr: HrSeries, n_regions: int
) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "window": np.arange(len(outcomes)),
            "start_s": hr.times,
            "bpm": [np.nan if o.bpm is None else o.bpm for o in outcomes],
            "bpm_filled": hr.bpm,
            "valid": hr.valid,
            "flat": [o.flat for o in outcomes],
            "n_regions": n_regions,
            "n_selected": [len(o.selected) for o in outcomes],
            "selected": [";".join(str(i) for i in o.selected) for o in outcomes],
            "flags": [";".join(o.flags) for o in outcomes],
        }
    )


def _region_table(
    rows: Sequence[Tuple[float, List[RegionStats], Sequence[int]]]
) -> pd.DataFrame:
    """One row per (window, region) with the statistics the selection saw."""
    records = []
    for start_s, stats, ids in rows:
        chosen = set(ids)
        for s in stats:
            records.append(
                {
                    "window_start": start_s,
                    "region_id": s.region_id,
                    "variance": s.variance,
                    "kfd": np.nan if s.kfd is None else s.kfd,
                    "dfa_alpha": s.dfa_alpha,
                    "snr_db": s.snr_db,
                    "psd_energy": s.psd_energy,
                    "selected": s.region_id in chosen,
                }
            )
    return pd.DataFrame.from_records(records, columns=REGION_COLUMNS)


def save_extract(result: ExtractResult, out_dir: str) -> Dict[str, str]:
    """Write the pulse signal, heart-rate series and diagnostics as CSV files.

    Runs with region selection also get ``{label}_regions.csv``, the per-window
    region statistics with the selected flag.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "signal": os.path.join(out_dir, f"{result.label}_signal.csv"),
        "hr": os.path.join(out_dir, f"{result.label}_hr.csv"),
        "diagnostics": os.path.join(out_dir, f"{result.label}_diagnostics.csv"),
    }
    times = np.arange(len(result.signal)) / result.signal.fs
    pd.DataFrame({"t": times, "value": result.signal.samples}).to_csv(
        paths["signal"], index=False, float_format="%.9g"
    )
    result.hr.to_frame().to_csv(paths["hr"], index=False)
    result.diagnostics.to_csv(paths["diagnostics"], index=False)
    if result.regions is not None:
        paths["regions"] = os.path.join(out_dir, f"{result.label}_regions.csv")
        result.regions.to_csv(paths["regions"], index=False, float_format="%.9g")
    logger.debug(f"Wrote extraction outputs for {result.label} to {out_dir}")
    return paths
