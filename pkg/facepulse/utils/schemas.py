"""
Schema definitions for configuration validation.

This module provides Pydantic models for validating configuration, dataset
descriptors and synthetic-video specifications.
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

METHOD_NAMES = ("green", "ica", "pca", "chrom", "pbv", "2sr", "lab", "pos", "lgi", "omit")
PIXEL_METHODS = ("2sr",)
NORMALIZED_PIPELINES = ("normalized_single", "multi_region")


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class BandpassSpec(_Frozen):
    """Schema for the Kaiser-window FIR band-pass filter."""

    low_hz: float = Field(0.75, gt=0, description="Lower band edge in Hz")
    high_hz: float = Field(4.0, gt=0, description="Upper band edge in Hz")
    beta: float = Field(25.0, ge=0, description="Kaiser window shape parameter")
    num_taps: Optional[int] = Field(
        None, description="Filter length (odd); None derives it from the sampling rate"
    )

    @field_validator("num_taps")
    @classmethod
    def validate_num_taps(cls, v):
        if v is not None and (v < 3 or v % 2 == 0):
            raise ValueError("num_taps must be an odd integer >= 3")
        return v

    @model_validator(mode="after")
    def validate_band(self):
        if self.low_hz >= self.high_hz:
            raise ValueError("low_hz must be below high_hz")
        return self

    def taps_for(self, fs: float) -> int:
        """Return the tap count used at sampling rate ``fs``."""
        if self.num_taps is not None:
            return self.num_taps
        taps = int(round(8.0 * fs))
        return taps if taps % 2 == 1 else taps + 1


class WelchParams(_Frozen):
    """Schema for Welch periodogram parameters (None means derived from the window)."""

    seg_len: Optional[int] = Field(None, gt=1, description="Segment length in samples")
    overlap_frac: float = Field(0.5, ge=0, lt=1, description="Segment overlap ratio")
    nfft: Optional[int] = Field(None, gt=1, description="FFT length in samples")


class SpectralConfig(_Frozen):
    """Schema for heart-rate estimation."""

    band: Tuple[float, float] = Field((0.75, 4.0), description="Pulse band in Hz")
    welch: WelchParams = Field(default_factory=WelchParams)
    win_s: float = Field(10.0, gt=0, description="Analysis window length in seconds")
    step_s: float = Field(1.0, gt=0, description="Analysis window step in seconds")

    @field_validator("band")
    @classmethod
    def validate_band(cls, v):
        if not 0 < v[0] < v[1]:
            raise ValueError("band must satisfy 0 < low < high")
        return v


class SelectionConfig(_Frozen):
    """Schema for dynamic multi-region selection."""

    grid_n: int = Field(9, ge=2, description="Grid side (n x n regions)")
    kfd_threshold: float = Field(0.85, gt=0, le=1, description="Katz FD threshold")
    kfd_mode: Literal["relative", "absolute"] = Field("relative")
    dfa_low: float = Field(0.75, description="Lower (open) DFA exponent bound")
    dfa_high: float = Field(1.0, description="Upper (closed) DFA exponent bound")
    dfa_mode: Literal["relative", "absolute"] = Field(
        "relative", description="Compare alpha over the window maximum, or as is"
    )
    max_regions: int = Field(32, ge=1, description="Regions kept after energy ranking")
    window_s: float = Field(10.0, gt=0, description="Selection window in seconds")
    stats_channel: Literal["r", "g", "b"] = Field("g")
    enabled: bool = Field(True, description="False keeps every region")

    @model_validator(mode="after")
    def validate_dfa(self):
        if self.dfa_low >= self.dfa_high:
            raise ValueError("dfa_low must be below dfa_high")
        return self


class MethodOptions(_Frozen):
    """Schema for RGB-to-pulse method parameters."""

    pbv_signature: Tuple[float, float, float] = Field((0.33, 0.77, 0.53))
    pos_window_s: float = Field(1.6, gt=0)
    ica_seed: int = Field(0, ge=0)
    ica_max_iter: int = Field(1000, ge=10)


class ReferenceConfig(_Frozen):
    """Schema for reference-signal gap handling."""

    flat_eps_rel: float = Field(1e-6, gt=0, description="Flatline step relative to range")
    min_gap_s: float = Field(0.5, gt=0, description="Shortest flatline treated as a gap")
    max_invalid_frac: float = Field(0.2, ge=0, le=1, description="Window invalidation ratio")


class EvaluationConfig(_Frozen):
    """Schema for alignment and metrics."""

    max_lag_s: float = Field(3.0, ge=0)
    scale_mode: Literal["none", "znorm"] = Field("none")
    min_common_windows: int = Field(10, ge=3)
    min_envelope_sd_bpm: float = Field(
        0.25, ge=0, description="Envelope spread below which a lag carries no timing information"
    )
    lag_mode: Literal["per_video", "dataset"] = Field(
        "per_video", description="Apply each video's own lag or the dataset median"
    )


class PipelineConfig(_Frozen):
    """Schema for one extraction pipeline."""

    pipeline: Literal["fixed_crop", "improved", "normalized_single", "multi_region"] = Field(
        "multi_region"
    )
    method: str = Field("omit", description="RGB-to-pulse method registry key")
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    bandpass: BandpassSpec = Field(default_factory=BandpassSpec)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    methods: MethodOptions = Field(default_factory=MethodOptions)
    pre_post_filter: Literal["pre", "post", "both"] = Field("pre")
    prefilters: Tuple[Literal["detrend", "bandpass", "moving_average"], ...] = Field(
        ("detrend", "bandpass")
    )
    detrend_method: Literal["linear", "smoothness_priors"] = Field("linear")
    detrend_lambda: float = Field(300.0, gt=0)
    ma_width_s: float = Field(0.1, gt=0, description="Moving-average width in seconds")
    region_mode: Literal["grid", "forehead", "cheeks", "combined", "face"] = Field("grid")
    windowing: Literal["pre_conversion", "post_conversion"] = Field("pre_conversion")

    @field_validator("method")
    @classmethod
    def validate_method(cls, v):
        v = v.lower()
        if v not in METHOD_NAMES:
            raise ValueError(f"Method must be one of {list(METHOD_NAMES)}")
        return v

    @model_validator(mode="after")
    def validate_consistency(self):
        if self.method in PIXEL_METHODS and self.pipeline not in NORMALIZED_PIPELINES:
            raise ValueError(
                f"Method {self.method} needs pixel access; use one of {list(NORMALIZED_PIPELINES)}"
            )
        return self


class RunConfig(_Frozen):
    """Schema for run-level settings."""

    jobs: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    out_dir: str = Field("runs")
    log_file: Optional[str] = Field(None)


class FacePulseConfig(_Frozen):
    """Schema for the complete facepulse configuration."""

    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    run: RunConfig = Field(default_factory=RunConfig)


class VideoEntry(_Frozen):
    """Schema for one video of a dataset descriptor (paths relative to the dataset root)."""

    video_id: str
    frames: str = Field(..., description="Frame directory or raw container")
    landmarks: str
    reference: str
    reference_kind: Literal["bvp", "ecg"] = Field("bvp")
    reference_fs: float = Field(..., gt=0)
    scenario: str = Field("default")
    ecg_channel: Optional[int] = Field(None, ge=0, description="Column of a multi-lead ECG file")


class DatasetDescriptor(_Frozen):
    """Schema for a dataset descriptor file."""

    name: str
    root: str
    entries: List[VideoEntry] = Field(default_factory=list)
    alignment_override_s: Optional[float] = Field(
        None, description="Fixed lag used instead of the estimator"
    )

    model_config = ConfigDict(frozen=False, extra="forbid")


class SyntheticSpec(_Frozen):
    """Schema for a synthetic rPPG video."""

    duration_s: float = Field(60.0, gt=0)
    fs: float = Field(30.0, gt=0, description="Video frame rate")
    hr_trajectory: Tuple[Tuple[float, float], ...] = Field(
        ((0.0, 72.0),), description="Piecewise-constant (start_s, bpm) segments"
    )
    amplitude: float = Field(0.01, gt=0, description="Pulse amplitude relative to base colour")
    pulsatility: Tuple[float, float, float] = Field((0.33, 0.77, 0.53))
    injected_regions: Optional[Tuple[int, ...]] = Field(
        None, description="Grid region ids carrying the pulse; None means all skin"
    )
    grid_n: int = Field(9, ge=2, description="Grid used to interpret injected_regions")
    residual_amplitude: float = Field(
        0.0, ge=0, description="Pulse amplitude on skin outside the injected regions"
    )
    noise_sigma: float = Field(2.0, ge=0, description="Per-pixel Gaussian noise in 8-bit levels")
    motion: Literal["static", "translation"] = Field("static")
    velocity: Tuple[float, float] = Field((0.0, 0.0), description="Translation in px/s")
    landmark_jitter_px: float = Field(0.0, ge=0)
    quantize: bool = Field(True, description="Round frames to 8-bit")
    frame_size: Tuple[int, int] = Field((256, 256), description="Frame (width, height)")
    face_scale: float = Field(0.55, gt=0, le=1, description="Face height over frame height")
    reference_fs: float = Field(60.0, gt=0)
    background: Tuple[float, float, float] = Field((40.0, 45.0, 50.0))

    @field_validator("hr_trajectory")
    @classmethod
    def validate_trajectory(cls, v):
        if not v:
            raise ValueError("hr_trajectory needs at least one segment")
        starts = [s for s, _ in v]
        if starts[0] != 0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("hr_trajectory starts must begin at 0 and increase")
        for _, bpm in v:
            if not 45 <= bpm <= 240:
                raise ValueError("hr_trajectory bpm must lie within 45-240")
        return v
