"""
RGB-to-pulse conversion for facepulse.

This package provides the ten conversion methods and the registry that
dispatches to them by name.
"""

from .base import PulseWindow, TraceMatrix, peak_ratio, select_component
from .methods import (
    chrom,
    green,
    ica_method,
    lab_method,
    lgi,
    omit,
    omit_basis,
    pbv,
    pca_method,
    pos,
    rgb_to_lab,
)
from .registry import METHODS, MethodSpec, convert, get_method
from .ssr import frame_eigensystems, ssr_2sr

__all__ = [
    "METHODS",
    "MethodSpec",
    "PulseWindow",
    "TraceMatrix",
    "chrom",
    "convert",
    "frame_eigensystems",
    "get_method",
    "green",
    "ica_method",
    "lab_method",
    "lgi",
    "omit",
    "omit_basis",
    "pbv",
    "pca_method",
    "peak_ratio",
    "pos",
    "rgb_to_lab",
    "select_component",
    "ssr_2sr",
]
