"""
Canonical mesh utilities for facepulse.

This module provides the fixed 85-vertex, 131-triangle face mesh: building it
from a Delaunay triangulation of the canonical shape, and reading/writing the
versioned mesh data file.
"""

import hashlib
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import Delaunay

from ..utils.exceptions import DataError, InvalidInputError
from ..utils.logging import get_logger
from .landmarks import (
    CANONICAL_SIZE,
    EXTENSION_VERSION,
    EYE_LEFT,
    EYE_RIGHT,
    MOUTH_INNER,
    N_EXTENDED,
    canonical_shape_85,
)

logger = get_logger()

N_TRIANGLES = 131
MESH_VERSION = f"facepulse-mesh-1/{EXTENSION_VERSION}"
MESH_DATA_FILE = "canonical_mesh.txt"

# Triangles with all three corners in one of these groups cover a hole
HOLE_GROUPS = (frozenset(EYE_LEFT), frozenset(EYE_RIGHT), frozenset(MOUTH_INNER))


@dataclass(frozen=True)
class CanonicalMesh:
    """The canonical face mesh.

    Attributes:
        vertices: (85, 2) canonical coordinates
        triangles: (131, 3) vertex indices
        size: Canonical raster side in pixels
        version: Mesh version string
    """

    vertices: np.ndarray
    triangles: np.ndarray
    size: int = CANONICAL_SIZE
    version: str = MESH_VERSION

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=np.float64, copy=True)
        triangles = np.array(self.triangles, dtype=np.int64, copy=True)
        if vertices.shape != (N_EXTENDED, 2):
            raise InvalidInputError(f"Mesh needs {N_EXTENDED} vertices, got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise InvalidInputError(f"Triangles must be (k, 3), got {triangles.shape}")
        if triangles.min() < 0 or triangles.max() >= N_EXTENDED:
            raise InvalidInputError("Triangle vertex index out of range")
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    def triangle_areas(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        """Unsigned triangle areas for the given vertex positions (default canonical)."""
        return triangle_areas(self.vertices if points is None else points, self.triangles)

    @cached_property
    def pixel_map(self) -> "PixelMap":
        """Per-pixel triangle ownership and barycentric weights (computed once)."""
        return build_pixel_map(self)

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean (size, size) mask of canonical pixels covered by the mesh."""
        return self.pixel_map.triangle >= 0

    def checksum(self) -> str:
        return hashlib.sha256(_body_text(self).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class PixelMap:
    """Canonical pixel to triangle assignment.

    Attributes:
        triangle: (size, size) triangle index per pixel, -1 outside the mesh
        weights: (size, size, 3) barycentric weights of the pixel centre
    """

    triangle: np.ndarray
    weights: np.ndarray


def triangle_areas(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    return 0.5 * np.abs(cross)


def _quality(points: np.ndarray, tri: np.ndarray) -> float:
    """Area over squared longest edge; near zero for slivers."""
    p = points[tri]
    edges = [np.sum((p[i] - p[(i + 1) % 3]) ** 2) for i in range(3)]
    area = triangle_areas(points, tri[None, :])[0]
    return float(area / max(edges))


def _in_hole(tri) -> bool:
    corners = set(int(v) for v in tri)
    return any(corners <= group for group in HOLE_GROUPS)


def build_mesh(size: int = CANONICAL_SIZE) -> CanonicalMesh:
    """Triangulate the canonical shape into exactly 131 triangles.

    Delaunay triangles lying entirely inside an eye or the inner mouth are
    pruned. Surplus triangles are then removed from the convex-hull boundary,
    lowest quality first; a deficit is filled by restoring pruned triangles,
    largest first.

    Args:
        size: Canonical raster side in pixels

    Returns:
        The canonical mesh

    Raises:
        InvalidInputError: If the triangle count cannot be reached
    """
    vertices = canonical_shape_85(size)
    delaunay = Delaunay(vertices)
    simplices = [tuple(sorted(int(v) for v in s)) for s in delaunay.simplices]
    simplices.sort()

    kept: List[Tuple[int, int, int]] = [s for s in simplices if not _in_hole(s)]
    pruned: List[Tuple[int, int, int]] = [s for s in simplices if _in_hole(s)]

    hull_edges = {tuple(sorted(int(v) for v in e)) for e in delaunay.convex_hull}

    def touches_hull(tri: Tuple[int, int, int]) -> bool:
        a, b, c = tri
        return any(e in hull_edges for e in ((a, b), (a, c), (b, c)))

    while len(kept) > N_TRIANGLES:
        candidates = [t for t in kept if touches_hull(t)]
        if not candidates:
            raise InvalidInputError("No boundary triangle left to remove")
        worst = min(candidates, key=lambda t: (_quality(vertices, np.array(t)), t))
        kept.remove(worst)

    if len(kept) < N_TRIANGLES:
        pruned.sort(key=lambda t: (-triangle_areas(vertices, np.array([t]))[0], t))
        needed = N_TRIANGLES - len(kept)
        if needed > len(pruned):
            raise InvalidInputError(
                f"Triangulation has only {len(kept) + len(pruned)} triangles"
            )
        kept.extend(pruned[:needed])

    triangles = np.array(sorted(kept), dtype=np.int64)
    mesh = CanonicalMesh(vertices, triangles, size=size)
    if np.any(mesh.triangle_areas() <= 0):
        raise InvalidInputError("Canonical mesh contains a degenerate triangle")
    logger.debug(f"Built canonical mesh with {len(triangles)} triangles")
    return mesh


def build_pixel_map(mesh: CanonicalMesh) -> PixelMap:
    """Assign every canonical pixel centre to the first triangle containing it."""
    size = mesh.size
    owner = np.full((size, size), -1, dtype=np.int64)
    weights = np.zeros((size, size, 3), dtype=np.float64)
    eps = 1e-9

    for t, (i, j, k) in enumerate(mesh.triangles):
        a, b, c = mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]
        x0 = max(int(np.floor(min(a[0], b[0], c[0]))), 0)
        x1 = min(int(np.ceil(max(a[0], b[0], c[0]))), size - 1)
        y0 = max(int(np.floor(min(a[1], b[1], c[1]))), 0)
        y1 = min(int(np.ceil(max(a[1], b[1], c[1]))), size - 1)
        if x1 < x0 or y1 < y0:
            continue

        ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
        det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1])
        w0 = ((b[1] - c[1]) * (xs - c[0]) + (c[0] - b[0]) * (ys - c[1])) / det
        w1 = ((c[1] - a[1]) * (xs - c[0]) + (a[0] - c[0]) * (ys - c[1])) / det
        w2 = 1.0 - w0 - w1
        inside = (w0 >= -eps) & (w1 >= -eps) & (w2 >= -eps)

        region = owner[y0 : y1 + 1, x0 : x1 + 1]
        take = inside & (region < 0)
        region[take] = t
        wregion = weights[y0 : y1 + 1, x0 : x1 + 1]
        wregion[take] = np.stack([w0[take], w1[take], w2[take]], axis=-1)

    owner.setflags(write=False)
    weights.setflags(write=False)
    return PixelMap(owner, weights)


def _body_text(mesh: CanonicalMesh) -> str:
    lines = [f"size {mesh.size}", f"vertices {mesh.vertices.shape[0]}"]
    lines += [f"{i} {x:.6f} {y:.6f}" for i, (x, y) in enumerate(mesh.vertices)]
    lines.append(f"triangles {mesh.triangles.shape[0]}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    return "\n".join(lines) + "\n"


def save_mesh(mesh: CanonicalMesh, path: str) -> str:
    """Write the mesh data file.

    Format: a version line, a checksum line (sha256 of the body), then the body
    with 85 "index x y" vertex rows and the "i j k" triangle rows.

    Args:
        mesh: Mesh to write
        path: Output file path

    Returns:
        The checksum written to the header
    """
    body = _body_text(mesh)
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(f"version {mesh.version}\nchecksum {checksum}\n{body}", encoding="utf-8")
    logger.info(f"Wrote canonical mesh ({mesh.triangles.shape[0]} triangles) to {path}")
    return checksum


def parse_mesh(text: str) -> CanonicalMesh:
    """Parse and verify the mesh data file contents.

    Raises:
        DataError: If the file is malformed or the checksum does not match
    """
    lines = text.splitlines()
    try:
        version = lines[0].split(maxsplit=1)[1]
        expected = lines[1].split()[1]
        body_lines = lines[2:]
        body = "\n".join(body_lines) + "\n"
        if hashlib.sha256(body.encode("utf-8")).hexdigest() != expected:
            raise DataError("Canonical mesh checksum mismatch")

        size = int(body_lines[0].split()[1])
        n_vertices = int(body_lines[1].split()[1])
        vertex_rows = body_lines[2 : 2 + n_vertices]
        vertices = np.array([[float(v) for v in row.split()[1:3]] for row in vertex_rows])
        n_tri = int(body_lines[2 + n_vertices].split()[1])
        tri_rows = body_lines[3 + n_vertices : 3 + n_vertices + n_tri]
        triangles = np.array([[int(v) for v in row.split()] for row in tri_rows])
    except (IndexError, ValueError) as e:
        raise DataError(f"Malformed canonical mesh file: {e}") from e

    if triangles.shape[0] != N_TRIANGLES:
        raise DataError(f"Mesh file has {triangles.shape[0]} triangles, expected {N_TRIANGLES}")
    return CanonicalMesh(vertices, triangles, size=size, version=version)


def load_mesh_file(path: str) -> CanonicalMesh:
    """Load a mesh data file from disk."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot read mesh file {path}: {e}") from e
    return parse_mesh(text)


def packaged_mesh_text() -> str:
    """Contents of the mesh data file shipped in ``facepulse.data``.

    Raises:
        DataError: If the package was installed without its data file
    """
    packaged = resources.files("facepulse.data").joinpath(MESH_DATA_FILE)
    if not packaged.is_file():
        raise DataError(f"Packaged canonical mesh {MESH_DATA_FILE} is missing")
    return packaged.read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def load_mesh() -> CanonicalMesh:
    """Return the frozen canonical mesh from the packaged data file."""
    mesh = parse_mesh(packaged_mesh_text())
    logger.debug(f"Loaded packaged canonical mesh {mesh.version}")
    return mesh
