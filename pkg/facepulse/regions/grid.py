"""
Region geometry for facepulse.

This module provides the grid partition of the canonical raster, the fixed
forehead/cheek patches and the extraction of mean-RGB traces per region.
"""

from dataclasses import dataclass
from typing import List, Literal, Sequence

import numpy as np

from ..facegeom.landmarks import BROWS, FOREHEAD_TOP
from ..facegeom.warp import NormalizedFaceStack
from ..utils.exceptions import InvalidInputError

PatchMode = Literal["forehead", "cheeks", "combined"]

FOREHEAD_ID = 0
LEFT_CHEEK_ID = 1
RIGHT_CHEEK_ID = 2


@dataclass(frozen=True)
class RegionBox:
    """Half-open rectangle [x0, x1) x [y0, y1) in canonical pixels."""

    id: int
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise InvalidInputError(f"Empty region box {self}")

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class RgbTrace:
    """Per-frame mean colour of one region.

    Attributes:
        r, g, b: Channel means per frame
        fs: Frame rate in Hz
        region_id: Region the trace belongs to
    """

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    fs: float
    region_id: int

    def __post_init__(self):
        if not (len(self.r) == len(self.g) == len(self.b)):
            raise InvalidInputError("RGB trace channels differ in length")

    def __len__(self) -> int:
        return len(self.g)

    @property
    def matrix(self) -> np.ndarray:
        """3 x N matrix with rows R, G, B."""
        return np.vstack([self.r, self.g, self.b])

    def channel(self, name: str) -> np.ndarray:
        return {"r": self.r, "g": self.g, "b": self.b}[name]

    def slice(self, start: int, stop: int) -> "RgbTrace":
        return RgbTrace(
            self.r[start:stop], self.g[start:stop], self.b[start:stop], self.fs, self.region_id
        )

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, fs: float, region_id: int) -> "RgbTrace":
        m = np.asarray(matrix, dtype=np.float64)
        return cls(m[0].copy(), m[1].copy(), m[2].copy(), fs, region_id)


def _split(total: int, n: int) -> np.ndarray:
    """Edges of an integer partition; the first total % n parts get one extra pixel."""
    sizes = np.full(n, total // n)
    sizes[: total % n] += 1
    return np.concatenate(([0], np.cumsum(sizes)))


def grid_partition(width: int, height: int, n: int) -> List[RegionBox]:
    """Tile a raster with n x n boxes in row-major order.

    Args:
        width: Raster width in pixels
        height: Raster height in pixels
        n: Grid side

    Returns:
        n * n boxes; box id = row * n + column

    Raises:
        InvalidInputError: If n is not within [1, min(width, height)]
    """
    if n < 1 or n > min(width, height):
        raise InvalidInputError(f"Grid side {n} does not fit a {width}x{height} raster")
    xs = _split(width, n)
    ys = _split(height, n)
    return [
        RegionBox(row * n + col, int(xs[col]), int(ys[row]), int(xs[col + 1]), int(ys[row + 1]))
        for row in range(n)
        for col in range(n)
    ]


def fixed_patches(lm85: np.ndarray, mode: PatchMode = "combined") -> List[RegionBox]:
    """Forehead and cheek patches from 85-point canonical landmarks.

    The forehead box spans brows 19-24 horizontally, from below the forehead
    top row to above every eyebrow point. Each cheek box runs from the jaw to
    the nose wing and from the lower eyelid to the nostrils.

    Args:
        lm85: (85, 2) landmarks in canonical coordinates
        mode: "forehead", "cheeks" or "combined"

    Returns:
        1, 2 or 3 boxes (forehead id 0, cheeks ids 1 and 2)
    """
    p = np.asarray(lm85, dtype=np.float64)
    if p.shape != (85, 2):
        raise InvalidInputError(f"fixed_patches needs (85, 2) landmarks, got {p.shape}")

    boxes: List[RegionBox] = []
    if mode in ("forehead", "combined"):
        top_row = p[list(FOREHEAD_TOP)][2:8]  # above brows 19-24
        brow_top = p[list(BROWS)][:, 1].min()
        boxes.append(
            RegionBox(
                FOREHEAD_ID,
                int(np.ceil(p[19, 0])),
                int(np.ceil(top_row[:, 1].max())),
                int(np.floor(p[24, 0])),
                int(np.floor(brow_top)),
            )
        )
    if mode in ("cheeks", "combined"):
        y1 = int(np.floor(max(p[31, 1], p[35, 1])))
        boxes.append(
            RegionBox(
                LEFT_CHEEK_ID,
                int(np.ceil(p[3, 0])),
                int(np.ceil(max(p[40, 1], p[41, 1]))),
                int(np.floor(p[31, 0])),
                y1,
            )
        )
        boxes.append(
            RegionBox(
                RIGHT_CHEEK_ID,
                int(np.ceil(p[35, 0])),
                int(np.ceil(max(p[46, 1], p[47, 1]))),
                int(np.floor(p[13, 0])),
                y1,
            )
        )
    if not boxes:
        raise InvalidInputError(f"Unknown patch mode: {mode}")
    return boxes


def extract_traces(stack: NormalizedFaceStack, boxes: Sequence[RegionBox]) -> List[RgbTrace]:
    """Mean RGB per frame inside each box (zero pixels outside the mesh included).

    Raises:
        InvalidInputError: If a box leaves the raster
    """
    _, height, width, _ = stack.frames.shape
    traces = []
    for box in boxes:
        if box.x0 < 0 or box.y0 < 0 or box.x1 > width or box.y1 > height:
            raise InvalidInputError(f"Region {box.id} exceeds the {width}x{height} raster")
        means = stack.frames[:, box.y0 : box.y1, box.x0 : box.x1, :].mean(
            axis=(1, 2), dtype=np.float64
        )
        traces.append(RgbTrace.from_matrix(means.T, stack.fs, box.id))
    return traces


def masked_trace(frames: np.ndarray, mask: np.ndarray, fs: float, region_id: int = 0) -> RgbTrace:
    """Mean RGB per frame over the pixels of a fixed boolean mask.

    Raises:
        InvalidInputError: If the mask is empty
    """
    if not mask.any():
        raise InvalidInputError("Trace mask selects no pixels")
    means = frames[:, mask, :].mean(axis=1, dtype=np.float64)
    return RgbTrace.from_matrix(means.T, fs, region_id)
