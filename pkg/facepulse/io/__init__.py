"""
Data input and output for facepulse.

This package provides frame sources, landmark and reference files, dataset
descriptors and the synthetic video generator.
"""

from .datasets import EntryPaths, entry_paths, load_dataset, missing_files, save_dataset
from .frames import FrameSequence, load_frames, load_raw, write_frame_dir, write_raw
from .landmarks import load_landmarks, write_landmarks
from .reference import load_reference, write_reference
from .synthetic import SyntheticVideo, synth_generate, write_synthetic_dataset

__all__ = [
    "EntryPaths",
    "FrameSequence",
    "SyntheticVideo",
    "entry_paths",
    "load_dataset",
    "load_frames",
    "load_landmarks",
    "load_raw",
    "load_reference",
    "missing_files",
    "save_dataset",
    "synth_generate",
    "write_frame_dir",
    "write_landmarks",
    "write_raw",
    "write_reference",
    "write_synthetic_dataset",
]
