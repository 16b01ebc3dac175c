"""
Landmark utilities for facepulse.

This module provides the 68-point landmark container, the canonical frontal
shape and the deterministic 68 -> 85 point forehead extension.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..utils.exceptions import DegenerateFaceError, InvalidInputError

N_BASE = 68
N_EXTENDED = 85
EXTENSION_VERSION = "forehead-v1"

CANONICAL_SIZE = 180
CANONICAL_MARGIN = 0.10

JAW = tuple(range(0, 17))
BROWS = tuple(range(17, 27))
NOSE_BRIDGE = tuple(range(27, 31))
NOSE_BASE = tuple(range(31, 36))
EYE_LEFT = tuple(range(36, 42))
EYE_RIGHT = tuple(range(42, 48))
MOUTH_OUTER = tuple(range(48, 60))
MOUTH_INNER = tuple(range(60, 68))
FOREHEAD_TOP = tuple(range(68, 78))
FOREHEAD_APEX = 78
FOREHEAD_MID = tuple(range(79, 85))

# Eyebrow points that also get a mid-forehead point
MID_ROW_BROWS = (17, 19, 21, 22, 24, 26)
TOP_SCALE = 1.4
MID_SCALE = 0.7
APEX_SCALE = 2.0

# Mean frontal 68-point shape (Multi-PIE ordering) in a unit box
_MEAN_SHAPE_68 = np.array(
    [
        (0.0792396913815, 0.339223741112), (0.0829219487236, 0.456955367943),
        (0.0967927109165, 0.575648016728), (0.122141515615, 0.691921601066),
        (0.168687863544, 0.800341263616), (0.239789390707, 0.895732504778),
        (0.325662452515, 0.977068762493), (0.422318282013, 1.04329000149),
        (0.531777802068, 1.06080371126), (0.641296298053, 1.03981924107),
        (0.738105872266, 0.972268833998), (0.824444363295, 0.889624082279),
        (0.894792677532, 0.792494155836), (0.939395486253, 0.681546643421),
        (0.96111933829, 0.562238253072), (0.970579841181, 0.441758925744),
        (0.971193274221, 0.322118743967), (0.163846223133, 0.249151738053),
        (0.21780354657, 0.204255863861), (0.291299351124, 0.192367318323),
        (0.367460241458, 0.203582210627), (0.4392945113, 0.233135599851),
        (0.586445962425, 0.228141644834), (0.660152671635, 0.195923841854),
        (0.737466449096, 0.182360984545), (0.813236546239, 0.192828009114),
        (0.8707571886, 0.235293377042), (0.51534533827, 0.31863546193),
        (0.516221448289, 0.396200446263), (0.517118861835, 0.473797687758),
        (0.51816430343, 0.553157797772), (0.433701156035, 0.604054457668),
        (0.475501237769, 0.62076344024), (0.520712933176, 0.634268222208),
        (0.565874114041, 0.618796581487), (0.607054002672, 0.60157671656),
        (0.252418718401, 0.331052263829), (0.298663015648, 0.302646354002),
        (0.355749724218, 0.303020650651), (0.403718978315, 0.33867711083),
        (0.352507175597, 0.349987615384), (0.296791759886, 0.350478978225),
        (0.631326076346, 0.334136672344), (0.679073381078, 0.29645404267),
        (0.73597236153, 0.294721285802), (0.782865376271, 0.321305281656),
        (0.740312274764, 0.341849376713), (0.68499850091, 0.343734332172),
        (0.353167761422, 0.746189164237), (0.414587777921, 0.719053835073),
        (0.477677654595, 0.706835892494), (0.522732900812, 0.717092275768),
        (0.569832064287, 0.705414478982), (0.635195811927, 0.71565572516),
        (0.69951672331, 0.739419187253), (0.639447159575, 0.805236879972),
        (0.576410514055, 0.835436670169), (0.525398405766, 0.841706377792),
        (0.47641545769, 0.837505914975), (0.41379548902, 0.810045601727),
        (0.380084785646, 0.749979603086), (0.477955996282, 0.74513234612),
        (0.523389793327, 0.748924302636), (0.571057789237, 0.74332894691),
        (0.672409137852, 0.744177032192), (0.572539621444, 0.776609286626),
        (0.5240106503, 0.783370783245), (0.477561227414, 0.781950167838),
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class LandmarkFrame:
    """Facial landmarks of one frame.

    Attributes:
        points: (68, 2) or (85, 2) pixel coordinates (x, y)
        frame_index: Index of the frame the points belong to
        confidence: Optional detector confidence in [0, 1]
    """

    points: np.ndarray
    frame_index: int = 0
    confidence: Optional[float] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, copy=True)
        if points.shape not in ((N_BASE, 2), (N_EXTENDED, 2)):
            raise InvalidInputError(
                f"Landmarks must have shape (68, 2) or (85, 2), got {points.shape}"
            )
        if not np.all(np.isfinite(points)):
            raise InvalidInputError(f"Landmarks of frame {self.frame_index} are not finite")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise InvalidInputError(f"Confidence must be in [0, 1], got {self.confidence}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def is_extended(self) -> bool:
        return self.points.shape[0] == N_EXTENDED

    def translated(self, dx: float, dy: float) -> "LandmarkFrame":
        return LandmarkFrame(self.points + (dx, dy), self.frame_index, self.confidence)


def _check_not_degenerate(points: np.ndarray) -> None:
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] <= 0 or s[1] <= 1e-9 * s[0]:
        raise DegenerateFaceError("Landmarks are collinear or coincident")
    if np.allclose(points[0], points[16]):
        raise DegenerateFaceError("Jaw end points 0 and 16 coincide")


def _brow_offsets(points: np.ndarray, brow_points: np.ndarray) -> np.ndarray:
    """Offset of each point from its foot on the line through landmarks 0 and 16."""
    a = points[0]
    u = points[16] - a
    u = u / np.linalg.norm(u)
    rel = brow_points - a
    foot = a + np.outer(rel @ u, u)
    return brow_points - foot


def forehead_points(points68: np.ndarray) -> np.ndarray:
    """Generate the 17 forehead points for a 68-point shape.

    Order: 10 top-row points above brows 17-26, one apex above the nose
    bridge, then 6 mid-row points above brows 17, 19, 21, 22, 24, 26.
    """
    brows = points68[list(BROWS)]
    top = brows + TOP_SCALE * _brow_offsets(points68, brows)

    mid_brow = 0.5 * (points68[21] + points68[22])
    apex = mid_brow + APEX_SCALE * _brow_offsets(points68, mid_brow[None, :])[0]

    mid_src = points68[list(MID_ROW_BROWS)]
    mid = mid_src + MID_SCALE * _brow_offsets(points68, mid_src)

    return np.vstack([top, apex[None, :], mid])


def extend_landmarks(lm: LandmarkFrame) -> LandmarkFrame:
    """Extend 68-point landmarks to the 85-point forehead-augmented scheme.

    Points 0-67 are copied unchanged; 85-point input passes through untouched.

    Args:
        lm: Landmarks with 68 (or already 85) points

    Returns:
        85-point landmarks

    Raises:
        DegenerateFaceError: If the points are collinear
    """
    if lm.is_extended:
        return lm
    points = lm.points
    _check_not_degenerate(points)
    extended = np.vstack([points, forehead_points(points)])
    return LandmarkFrame(extended, lm.frame_index, lm.confidence)


@lru_cache(maxsize=None)
def _canonical_68_cached(size: int) -> np.ndarray:
    unit85 = np.vstack([_MEAN_SHAPE_68, forehead_points(_MEAN_SHAPE_68)])
    lo = unit85.min(axis=0)
    hi = unit85.max(axis=0)
    inner = size * (1.0 - 2.0 * CANONICAL_MARGIN)
    scale = inner / float(np.max(hi - lo))
    offset = size / 2.0 - scale * (lo + hi) / 2.0
    shape = _MEAN_SHAPE_68 * scale + offset
    shape.setflags(write=False)
    return shape


def canonical_shape_68(size: int = CANONICAL_SIZE) -> np.ndarray:
    """Mean frontal shape scaled and centred into a size x size raster with a 10% margin."""
    return _canonical_68_cached(size).copy()


def canonical_shape_85(size: int = CANONICAL_SIZE) -> np.ndarray:
    """Canonical 85-point shape; by construction equal to extending the 68-point one."""
    return extend_landmarks(LandmarkFrame(canonical_shape_68(size))).points.copy()
