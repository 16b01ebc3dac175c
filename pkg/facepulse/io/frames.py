"""
Frame source utilities for facepulse.

This module provides readers and writers for the two frame-source formats:
numbered lossless image directories with a ``meta`` sidecar, and the raw
planar RGB container.
"""

import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict

import cv2
import numpy as np

from ..utils.exceptions import FrameSourceError, InvalidInputError
from ..utils.logging import get_logger

logger = get_logger()

RAW_MAGIC = b"F2PRAW1"
RAW_HEADER = struct.Struct("<IIId")  # width, height, frame count, fs
META_FILE = "meta"
FRAME_DIGITS = 6
FRAME_EXT = ".png"

_FRAME_NAME = re.compile(r"^(\d{6})\.(png|bmp|tif|tiff|ppm)$", re.IGNORECASE)


@dataclass(frozen=True)
class FrameSequence:
    """Decoded frames of one video.

    Attributes:
        frames: (N, H, W, 3) uint8 RGB rasters
        fs: Frame rate in Hz
    """

    frames: np.ndarray
    fs: float

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])


def _check_frames(frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[3] != 3 or frames.dtype != np.uint8:
        raise InvalidInputError(
            f"Frames must be an (N, H, W, 3) uint8 array, got {frames.shape} {frames.dtype}"
        )
    if frames.shape[0] == 0:
        raise InvalidInputError("No frames to write")
    return frames


def read_meta(directory: str) -> Dict[str, float]:
    """Parse the ``meta`` sidecar of a frame directory (``key=value`` lines).

    Raises:
        FrameSourceError: If the file is missing, malformed or lacks fs
    """
    path = os.path.join(directory, META_FILE)
    if not os.path.isfile(path):
        raise FrameSourceError(f"Missing frame metadata file: {path}")

    meta: Dict[str, float] = {}
    with open(path, "r") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FrameSourceError(f"{path}:{line_no}: expected key=value, got '{line}'")
            try:
                meta[key.strip()] = float(value)
            except ValueError as e:
                raise FrameSourceError(
                    f"{path}:{line_no}: value for '{key}' is not a number"
                ) from e

    if meta.get("fs", 0) <= 0:
        raise FrameSourceError(f"{path}: missing or non-positive fs")
    return meta


def load_frame_dir(directory: str) -> FrameSequence:
    """Load a directory of frames named 000001.png, 000002.png, ...

    Raises:
        FrameSourceError: On a gap in the numbering, an unreadable frame or a
            frame whose size differs from the first
    """
    meta = read_meta(directory)
    numbered = {}
    for name in os.listdir(directory):
        match = _FRAME_NAME.match(name)
        if match:
            numbered[int(match.group(1))] = os.path.join(directory, name)
    if not numbered:
        raise FrameSourceError(f"No frames found in {directory}")

    last = max(numbered)
    frames = []
    for index in range(1, last + 1):
        if index not in numbered:
            raise FrameSourceError(f"Frame {index} is missing from {directory}")
        bgr = cv2.imread(numbered[index], cv2.IMREAD_COLOR)
        if bgr is None:
            raise FrameSourceError(f"Frame {index} could not be decoded: {numbered[index]}")
        if frames and bgr.shape != frames[0].shape:
            raise FrameSourceError(
                f"Frame {index} has size {bgr.shape[:2]}, expected {frames[0].shape[:2]}"
            )
        frames.append(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))

    stack = np.stack(frames)
    if "width" in meta and int(meta["width"]) != stack.shape[2]:
        logger.warning(f"{directory}: meta width {int(meta['width'])} != {stack.shape[2]}")
    if "height" in meta and int(meta["height"]) != stack.shape[1]:
        logger.warning(f"{directory}: meta height {int(meta['height'])} != {stack.shape[1]}")
    return FrameSequence(stack, float(meta["fs"]))


def write_frame_dir(frames: np.ndarray, fs: float, directory: str) -> str:
    """Write frames as lossless PNG files plus the ``meta`` sidecar."""
    frames = _check_frames(frames)
    os.makedirs(directory, exist_ok=True)
    for i, frame in enumerate(frames, start=1):
        path = os.path.join(directory, f"{i:0{FRAME_DIGITS}d}{FRAME_EXT}")
        if not cv2.imwrite(path, cv2.cvtColor(frame, cv2.COLOR_RGB2BGR)):
            raise FrameSourceError(f"Could not write frame {i} to {path}")
    with open(os.path.join(directory, META_FILE), "w") as f:
        f.write(f"fs={fs!r}\nwidth={frames.shape[2]}\nheight={frames.shape[1]}\n")
    return directory


def load_raw(path: str) -> FrameSequence:
    """Load a raw planar RGB container.

    Layout: the 7-byte magic ``F2PRAW1``, a little-endian header (uint32 width,
    uint32 height, uint32 frame count, float64 fs), then per frame the R, G and
    B planes as 8-bit rows.

    Raises:
        FrameSourceError: On a bad magic, a bad header or a truncated body
    """
    with open(path, "rb") as f:
        if f.read(len(RAW_MAGIC)) != RAW_MAGIC:
            raise FrameSourceError(f"{path} is not a raw frame container")
        header = f.read(RAW_HEADER.size)
        if len(header) != RAW_HEADER.size:
            raise FrameSourceError(f"{path}: truncated header")
        width, height, count, fs = RAW_HEADER.unpack(header)
        if width == 0 or height == 0 or count == 0 or not fs > 0:
            raise FrameSourceError(f"{path}: invalid header ({width}x{height}, {count}, {fs})")

        frame_bytes = 3 * width * height
        body = np.frombuffer(f.read(), dtype=np.uint8)

    if body.size < frame_bytes * count:
        complete = body.size // frame_bytes
        raise FrameSourceError(f"{path}: frame {complete} is truncated ({count} declared)")
    planes = body[: frame_bytes * count].reshape(count, 3, height, width)
    return FrameSequence(np.ascontiguousarray(planes.transpose(0, 2, 3, 1)), float(fs))


def write_raw(frames: np.ndarray, fs: float, path: str) -> str:
    """Write frames to a raw planar RGB container."""
    frames = _check_frames(frames)
    count, height, width, _ = frames.shape
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(RAW_MAGIC)
        f.write(RAW_HEADER.pack(width, height, count, float(fs)))
        f.write(np.ascontiguousarray(frames.transpose(0, 3, 1, 2)).tobytes())
    return path


def load_frames(source: str) -> FrameSequence:
    """Load frames from a frame directory or a raw container.

    Raises:
        FrameSourceError: If the source does not exist or cannot be read
    """
    if os.path.isdir(source):
        sequence = load_frame_dir(source)
    elif os.path.isfile(source):
        sequence = load_raw(source)
    else:
        raise FrameSourceError(f"Frame source not found: {source}")
    logger.debug(
        f"Loaded {len(sequence)} frames ({sequence.width}x{sequence.height}) at {sequence.fs} Hz"
    )
    return sequence
