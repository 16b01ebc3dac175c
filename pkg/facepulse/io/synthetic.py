"""
Synthetic video utilities for facepulse.

This module provides a deterministic generator of face videos with a known
pulse, used as the ground-truth oracle for end-to-end checks, and a writer
that stores a generated suite as a dataset on disk.
"""

import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import cv2
import numpy as np

from ..dsp.signals import Signal1D
from ..facegeom.landmarks import (
    BROWS,
    CANONICAL_MARGIN,
    EYE_LEFT,
    EYE_RIGHT,
    MOUTH_OUTER,
    NOSE_BASE,
    LandmarkFrame,
    canonical_shape_68,
)
from ..facegeom.mesh import CanonicalMesh, load_mesh
from ..regions.grid import grid_partition
from ..utils.logging import get_logger
from ..utils.schemas import DatasetDescriptor, SyntheticSpec, VideoEntry
from .datasets import save_dataset
from .frames import write_raw
from .landmarks import write_landmarks
from .reference import write_reference

logger = get_logger()

SKIN_TONE = (200.0, 150.0, 130.0)
HARMONIC_AMPLITUDE = 0.4

_EYE_COLOUR = (70.0, 55.0, 55.0)
_BROW_COLOUR = (95.0, 70.0, 60.0)
_LIP_COLOUR = (175.0, 95.0, 95.0)
_NOSTRIL_COLOUR = (140.0, 95.0, 85.0)


@dataclass(frozen=True)
class SyntheticVideo:
    """A generated video with its ground truth.

    Attributes:
        frames: (N, H, W, 3) uint8 rasters, or float32 when not quantized
        fs: Frame rate in Hz
        landmarks: Observed (possibly jittered) 68-point landmarks per frame
        pulse: Injected pulse sampled at the frame times
        reference: The same pulse at the reference rate
        hr_bpm: True heart rate at the frame times
    """

    frames: np.ndarray
    fs: float
    landmarks: List[LandmarkFrame]
    pulse: Signal1D
    reference: Signal1D
    hr_bpm: np.ndarray

    def __len__(self) -> int:
        return int(self.frames.shape[0])


def hr_at(times: np.ndarray, trajectory: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Heart rate of a piecewise-constant trajectory at the given times."""
    starts = np.array([s for s, _ in trajectory])
    bpm = np.array([b for _, b in trajectory])
    idx = np.searchsorted(starts, times, side="right") - 1
    return bpm[np.clip(idx, 0, bpm.size - 1)]


def pulse_phase(times: np.ndarray, trajectory: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Cardiac phase (radians) obtained by integrating the heart-rate trajectory."""
    times = np.asarray(times, dtype=np.float64)
    phase = np.zeros_like(times)
    for i, (start, bpm) in enumerate(trajectory):
        end = trajectory[i + 1][0] if i + 1 < len(trajectory) else np.inf
        phase += (bpm / 60.0) * np.clip(times - start, 0.0, end - start)
    return 2.0 * np.pi * phase


def pulse_wave(times: np.ndarray, trajectory: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Pulse shape: fundamental plus a first harmonic at 0.4 amplitude."""
    phi = pulse_phase(times, trajectory)
    return np.sin(phi) + HARMONIC_AMPLITUDE * np.sin(2.0 * phi)


def render_texture(
    mesh: CanonicalMesh, rng: np.random.Generator, background: Tuple[float, float, float]
) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical face texture and its pulse-carrying skin mask.

    The skin is a shaded, mottled skin tone inside the mesh, with eye, brow,
    lip and nostril decals; everything outside the mesh is background.

    Returns:
        Tuple of (float64 (size, size, 3) texture, boolean skin mask)
    """
    size = mesh.size
    points = canonical_shape_68(size)

    tone = np.array(SKIN_TONE) * (1.0 + rng.uniform(-0.05, 0.05, 3))
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    centre = (size - 1) / 2.0
    r2 = ((xx - centre) ** 2 + (yy - centre) ** 2) / (centre**2)
    shading = 1.0 - 0.15 * np.clip(r2, 0.0, 1.0)

    mottle = cv2.GaussianBlur(rng.standard_normal((size, size)), (0, 0), sigmaX=6.0)
    mottle = 0.04 * mottle / max(float(np.abs(mottle).max()), 1e-12)

    texture = tone[None, None, :] * (shading * (1.0 + mottle))[:, :, None]

    decals = np.zeros((size, size, 3), dtype=np.float32)
    decal_mask = np.zeros((size, size), dtype=np.uint8)
    features_by_colour = (
        (EYE_LEFT, _EYE_COLOUR),
        (EYE_RIGHT, _EYE_COLOUR),
        (MOUTH_OUTER, _LIP_COLOUR),
    )
    for group, colour in features_by_colour:
        poly = [np.round(points[list(group)]).astype(np.int32)]
        cv2.fillPoly(decals, poly, colour)
        cv2.fillPoly(decal_mask, poly, 1)
    for start in (BROWS[0], BROWS[5]):
        brow = [np.round(points[start : start + 5]).astype(np.int32)]
        cv2.polylines(decals, brow, False, _BROW_COLOUR, thickness=3)
        cv2.polylines(decal_mask, brow, False, 1, thickness=3)
    for i in (NOSE_BASE[0], NOSE_BASE[-1]):
        centre_pt = tuple(int(v) for v in np.round(points[i]))
        cv2.circle(decals, centre_pt, 2, _NOSTRIL_COLOUR, -1)
        cv2.circle(decal_mask, centre_pt, 2, 1, -1)

    features = decal_mask.astype(bool)
    texture[features] = decals[features]
    inside = mesh.mask
    texture[~inside] = background
    return texture, inside & ~features


def _pulse_weights(spec: SyntheticSpec, skin: np.ndarray, size: int) -> np.ndarray:
    """Per-pixel pulse amplitude over the canonical raster."""
    weights = np.zeros((size, size), dtype=np.float64)
    if spec.injected_regions is None:
        weights[skin] = spec.amplitude
        return weights

    weights[skin] = spec.residual_amplitude
    boxes = {b.id: b for b in grid_partition(size, size, spec.grid_n)}
    for region_id in spec.injected_regions:
        box = boxes[region_id]
        window = weights[box.y0 : box.y1, box.x0 : box.x1]
        window[skin[box.y0 : box.y1, box.x0 : box.x1]] = spec.amplitude
    return weights


def _bounce(p: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Reflect positions into [lo, hi] (triangle wave)."""
    span = hi - lo
    if span <= 0:
        return np.full_like(p, (lo + hi) / 2.0)
    q = np.mod(p - lo, 2.0 * span)
    return lo + np.where(q > span, 2.0 * span - q, q)


def face_centres(spec: SyntheticSpec, times: np.ndarray, half_extent: float) -> np.ndarray:
    """Face centre in frame pixels at each time; translation bounces at the frame edges."""
    width, height = spec.frame_size
    start = np.array([width / 2.0, height / 2.0])
    if spec.motion == "static":
        return np.tile(start, (times.size, 1))
    velocity = np.asarray(spec.velocity, dtype=np.float64)
    raw = start[None, :] + times[:, None] * velocity[None, :]
    return np.column_stack(
        [
            _bounce(raw[:, 0], half_extent, width - half_extent),
            _bounce(raw[:, 1], half_extent, height - half_extent),
        ]
    )


def synth_generate(
    spec: SyntheticSpec, seed: int = 0, mesh: Optional[CanonicalMesh] = None
) -> SyntheticVideo:
    """Render a synthetic face video with a known pulse.

    Pixels in the injected regions (all skin when none are given) follow
    base * (1 + amplitude * w * s(t)) with w the pulsatility vector scaled to a
    unit maximum and s(t) the pulse wave. The face is placed by a similarity
    transform that follows the motion model; landmarks carry optional jitter.
    Identical (spec, seed) pairs give bit-identical output.

    Args:
        spec: Video description
        seed: Random seed
        mesh: Canonical mesh (the packaged mesh when None)

    Returns:
        SyntheticVideo with frames, landmarks and the ground-truth pulse
    """
    mesh = mesh or load_mesh()
    texture_rng, noise_rng, jitter_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )

    size = mesh.size
    texture, skin = render_texture(mesh, texture_rng, spec.background)
    amplitude = _pulse_weights(spec, skin, size)
    pulsatility = np.asarray(spec.pulsatility, dtype=np.float64)
    pulsatility = pulsatility / pulsatility.max()
    modulation = amplitude[:, :, None] * pulsatility[None, None, :]

    n = int(round(spec.duration_s * spec.fs))
    times = np.arange(n) / spec.fs
    wave = pulse_wave(times, spec.hr_trajectory)

    width, height = spec.frame_size
    scale = spec.face_scale * height / (size * (1.0 - 2.0 * CANONICAL_MARGIN))
    half_extent = scale * size * (0.5 - CANONICAL_MARGIN) + 2.0
    centres = face_centres(spec, times, half_extent)
    canonical68 = canonical_shape_68(size)
    background = tuple(float(c) for c in spec.background)

    dtype = np.uint8 if spec.quantize else np.float32
    frames = np.empty((n, height, width, 3), dtype=dtype)
    landmarks: List[LandmarkFrame] = []
    for k in range(n):
        offset = centres[k] - scale * (size / 2.0)
        affine = np.array([[scale, 0.0, offset[0]], [0.0, scale, offset[1]]])
        canon = (texture * (1.0 + modulation * wave[k])).astype(np.float32)
        frame = cv2.warpAffine(
            canon,
            affine,
            (width, height),
            flags=cv2.INTER_LINEAR,
            borderMode=cv2.BORDER_CONSTANT,
            borderValue=background,
        ).astype(np.float64)
        if spec.noise_sigma > 0:
            frame += noise_rng.normal(0.0, spec.noise_sigma, frame.shape)
        frames[k] = np.clip(np.rint(frame), 0, 255) if spec.quantize else frame

        points = canonical68 * scale + offset
        if spec.landmark_jitter_px > 0:
            points = points + jitter_rng.normal(0.0, spec.landmark_jitter_px, points.shape)
        landmarks.append(LandmarkFrame(points, frame_index=k))

    n_ref = int(round(spec.duration_s * spec.reference_fs))
    ref_times = np.arange(n_ref) / spec.reference_fs
    reference = Signal1D(pulse_wave(ref_times, spec.hr_trajectory), spec.reference_fs)

    logger.debug(
        f"Generated synthetic video: {n} frames {width}x{height}, seed {seed}, "
        f"trajectory {spec.hr_trajectory}"
    )
    return SyntheticVideo(
        frames=frames,
        fs=spec.fs,
        landmarks=landmarks,
        pulse=Signal1D(wave, spec.fs),
        reference=reference,
        hr_bpm=hr_at(times, spec.hr_trajectory),
    )


def write_synthetic_dataset(
    out_dir: str,
    n_videos: int = 10,
    seed: int = 0,
    base: Optional[SyntheticSpec] = None,
    bpm_range: Tuple[float, float] = (48.0, 180.0),
    name: str = "synthetic",
) -> str:
    """Generate a suite of videos and store it as a dataset.

    Each video gets a constant heart rate drawn uniformly from ``bpm_range``
    and its own seed. Frames go to raw containers, landmarks and references
    to CSV, and a descriptor ``dataset.yaml`` lists them.

    Returns:
        Path of the dataset descriptor
    """
    base = base or SyntheticSpec()
    rng = np.random.default_rng(seed)
    mesh = load_mesh()
    entries = []
    for i in range(n_videos):
        video_id = f"synth_{i:02d}"
        bpm = float(np.round(rng.uniform(*bpm_range), 1))
        spec = base.model_copy(update={"hr_trajectory": ((0.0, bpm),), "quantize": True})
        video = synth_generate(spec, seed=seed * 1000 + i, mesh=mesh)

        frames_rel = os.path.join("frames", f"{video_id}.raw")
        landmarks_rel = os.path.join("landmarks", f"{video_id}.csv")
        reference_rel = os.path.join("reference", f"{video_id}.csv")
        write_raw(video.frames, video.fs, os.path.join(out_dir, frames_rel))
        write_landmarks(video.landmarks, os.path.join(out_dir, landmarks_rel))
        write_reference(video.reference, os.path.join(out_dir, reference_rel))
        entries.append(
            VideoEntry(
                video_id=video_id,
                frames=frames_rel,
                landmarks=landmarks_rel,
                reference=reference_rel,
                reference_kind="bvp",
                reference_fs=spec.reference_fs,
                scenario=spec.motion,
            )
        )
        logger.info(f"Wrote {video_id} ({bpm} bpm)")

    descriptor = DatasetDescriptor(name=name, root=".", entries=entries)
    return save_dataset(descriptor, os.path.join(out_dir, "dataset.yaml"))
