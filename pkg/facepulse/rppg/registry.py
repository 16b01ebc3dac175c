"""
Method registry for facepulse.

This module maps the lowercase method names to their implementations and
dispatches a window to the right one.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from ..facegeom.warp import NormalizedFaceStack
from ..utils.exceptions import InvalidInputError
from ..utils.schemas import MethodOptions
from .base import PulseWindow, TraceMatrix
from .methods import chrom, green, ica_method, lab_method, lgi, omit, pbv, pca_method, pos
from .ssr import ssr_2sr


@dataclass(frozen=True)
class MethodSpec:
    """A registered RGB-to-pulse method.

    ``needs_pixels`` methods consume a NormalizedFaceStack window instead of a
    TraceMatrix.
    """

    name: str
    func: Callable[..., PulseWindow]
    needs_pixels: bool = False


METHODS: Dict[str, MethodSpec] = {
    "green": MethodSpec("green", green),
    "ica": MethodSpec("ica", ica_method),
    "pca": MethodSpec("pca", pca_method),
    "chrom": MethodSpec("chrom", chrom),
    "pbv": MethodSpec("pbv", pbv),
    "2sr": MethodSpec("2sr", ssr_2sr, needs_pixels=True),
    "lab": MethodSpec("lab", lab_method),
    "pos": MethodSpec("pos", pos),
    "lgi": MethodSpec("lgi", lgi),
    "omit": MethodSpec("omit", omit),
}


def get_method(name: str) -> MethodSpec:
    """Look up a method by (case-insensitive) name.

    Raises:
        InvalidInputError: If the name is not registered
    """
    key = name.lower()
    if key not in METHODS:
        raise InvalidInputError(
            f"Unknown method '{name}'. Available: {', '.join(METHODS)}"
        )
    return METHODS[key]


def convert(
    name: str,
    trace: Optional[TraceMatrix] = None,
    stack: Optional[NormalizedFaceStack] = None,
    options: Optional[MethodOptions] = None,
    band: Tuple[float, float] = (0.75, 4.0),
) -> PulseWindow:
    """Run a registered method on one window.

    Args:
        name: Method name
        trace: Mean RGB traces of the window (trace-based methods)
        stack: Normalized face stack window (pixel-based methods)
        options: Method options (defaults when None)
        band: Pulse band used by component selection

    Returns:
        PulseWindow produced by the method

    Raises:
        InvalidInputError: If the method is unknown or its input is missing
    """
    spec = get_method(name)
    if spec.needs_pixels:
        if stack is None:
            raise InvalidInputError(f"Method '{spec.name}' needs a normalized face stack")
        return spec.func(stack)
    if trace is None:
        raise InvalidInputError(f"Method '{spec.name}' needs a trace matrix")
    return spec.func(trace, options=options or MethodOptions(), band=band)
