"""
Face geometry for facepulse.

This package provides landmark extension, the canonical mesh and the
piecewise-affine normalization of frames.
"""

from .landmarks import (
    LandmarkFrame,
    canonical_shape_68,
    canonical_shape_85,
    extend_landmarks,
)
from .masks import crop_box, skin_mask
from .mesh import CanonicalMesh, build_mesh, load_mesh, load_mesh_file, save_mesh
from .warp import NormalizedFaceStack, normalize_sequence, warp_to_canonical, warp_with_flags

__all__ = [
    "CanonicalMesh",
    "LandmarkFrame",
    "NormalizedFaceStack",
    "build_mesh",
    "canonical_shape_68",
    "canonical_shape_85",
    "crop_box",
    "extend_landmarks",
    "load_mesh",
    "load_mesh_file",
    "normalize_sequence",
    "save_mesh",
    "skin_mask",
    "warp_to_canonical",
    "warp_with_flags",
]
