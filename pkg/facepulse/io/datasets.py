"""
Dataset utilities for facepulse.

This module provides loading of dataset descriptors with file checks, path
resolution for video entries and descriptor writing.
"""

import os
from dataclasses import dataclass
from typing import Dict, List

import yaml

from ..utils.config import load_dataset_descriptor
from ..utils.exceptions import DataError
from ..utils.logging import get_logger
from ..utils.schemas import DatasetDescriptor, VideoEntry

logger = get_logger()


@dataclass(frozen=True)
class EntryPaths:
    """Absolute paths of one video entry."""

    frames: str
    landmarks: str
    reference: str


def entry_paths(descriptor: DatasetDescriptor, entry: VideoEntry) -> EntryPaths:
    """Resolve an entry's paths against the dataset root."""

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(descriptor.root, p)

    return EntryPaths(resolve(entry.frames), resolve(entry.landmarks), resolve(entry.reference))


def missing_files(descriptor: DatasetDescriptor, entry: VideoEntry) -> List[str]:
    """Paths of an entry that do not exist on disk."""
    paths = entry_paths(descriptor, entry)
    return [p for p in (paths.frames, paths.landmarks, paths.reference) if not os.path.exists(p)]


def load_dataset(path: str, strict: bool = True) -> DatasetDescriptor:
    """Load a dataset descriptor and check that every entry's files exist.

    Args:
        path: Descriptor YAML path
        strict: Raise on missing files instead of only logging them

    Returns:
        The validated descriptor

    Raises:
        ConfigError: If the descriptor cannot be read or is invalid
        DataError: If strict and an entry references missing files
    """
    descriptor = load_dataset_descriptor(path)
    missing: Dict[str, List[str]] = {}
    for entry in descriptor.entries:
        absent = missing_files(descriptor, entry)
        if absent:
            missing[entry.video_id] = absent

    if missing:
        detail = "; ".join(f"{vid}: {', '.join(p)}" for vid, p in missing.items())
        if strict:
            raise DataError(f"Dataset {descriptor.name} has missing files ({detail})")
        logger.warning(f"Dataset {descriptor.name} has missing files ({detail})")

    ecg_without_channel = [
        e.video_id
        for e in descriptor.entries
        if e.reference_kind == "ecg" and e.ecg_channel is None
    ]
    if ecg_without_channel:
        logger.info(
            f"ECG entries without a channel index (single-column files expected): "
            f"{', '.join(ecg_without_channel)}"
        )
    logger.info(f"Loaded dataset {descriptor.name} with {len(descriptor.entries)} videos")
    return descriptor


def save_dataset(descriptor: DatasetDescriptor, path: str) -> str:
    """Write a dataset descriptor as YAML."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(
            descriptor.model_dump(mode="json", exclude_none=True),
            f,
            default_flow_style=False,
            sort_keys=False,
        )
    return path
