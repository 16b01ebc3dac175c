"""
Dynamic multi-region selection for facepulse.

This module provides the region screening cascade (variance, Katz FD, DFA,
energy ranking) and the time-domain aggregation of the selected regions.
"""

import math
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..dsp.signals import Signal1D
from ..utils.exceptions import InvalidInputError
from ..utils.logging import get_logger
from ..utils.schemas import SelectionConfig
from .quality import RegionStats

logger = get_logger()

FLAT_REL = 1e-12


def _by_energy(stats: Sequence[RegionStats]) -> List[RegionStats]:
    return sorted(stats, key=lambda s: (-s.psd_energy, s.region_id))


def _relative(values: Sequence[Optional[float]]) -> List[Optional[float]]:
    """Values over their maximum; None where undefined or when the maximum is not positive."""
    defined = [v for v in values if v is not None and math.isfinite(v)]
    top = max(defined) if defined else 0.0
    if top <= 0:
        return [None] * len(values)
    return [v / top if v is not None and math.isfinite(v) else None for v in values]


def select_regions(stats: Sequence[RegionStats], cfg: SelectionConfig) -> List[int]:
    """Select the regions carrying a usable pulse.

    Filters, in order: zero variance; Katz FD below the threshold; DFA exponent
    outside (dfa_low, dfa_high]; then the max_regions survivors with the highest
    in-band energy. In relative mode a measure is divided by its maximum over
    the regions still in the cascade, so the best region of the window scores
    exactly 1. Ties go to the lowest region id. An empty result falls back to
    the single region with the highest energy. With selection disabled every
    region is returned.

    Args:
        stats: One record per candidate region
        cfg: Selection settings

    Returns:
        Sorted list of selected region ids
    """
    if not stats:
        raise InvalidInputError("select_regions needs at least one region")
    if not cfg.enabled:
        return sorted(s.region_id for s in stats)

    survivors = [s for s in stats if s.variance > 0]
    after_variance = len(survivors)

    kfd = [s.kfd for s in survivors]
    if cfg.kfd_mode == "relative":
        kfd = _relative(kfd)
    survivors = [s for s, k in zip(survivors, kfd) if k is not None and k >= cfg.kfd_threshold]
    after_kfd = len(survivors)

    alpha: List[Optional[float]] = [
        None if math.isnan(s.dfa_alpha) else s.dfa_alpha for s in survivors
    ]
    if cfg.dfa_mode == "relative":
        alpha = _relative(alpha)
    survivors = [
        s for s, a in zip(survivors, alpha) if a is not None and cfg.dfa_low < a <= cfg.dfa_high
    ]
    after_dfa = len(survivors)

    chosen = _by_energy(survivors)[: cfg.max_regions]
    logger.debug(
        f"Region screening: {len(stats)} -> variance {after_variance} -> kfd {after_kfd} "
        f"-> dfa {after_dfa} -> kept {len(chosen)}"
    )
    if not chosen:
        fallback = _by_energy(stats)[0]
        logger.debug(f"No region survived screening; falling back to region {fallback.region_id}")
        return [fallback.region_id]
    return sorted(s.region_id for s in chosen)


def aggregate_regions(
    signals: Mapping[int, np.ndarray], ids: Sequence[int], fs: float
) -> Tuple[Signal1D, bool]:
    """Sum the selected region signals and normalise to unit variance.

    Args:
        signals: Pulse signal per region id (equal lengths)
        ids: Selected region ids
        fs: Sampling rate in Hz

    Returns:
        Tuple of (aggregate signal, flat flag). A flat aggregate (the inputs
        cancel) is returned as zeros with the flag set.

    Raises:
        InvalidInputError: If ids is empty or lengths differ
    """
    if len(ids) == 0:
        raise InvalidInputError("aggregate_regions needs at least one region id")
    parts = [np.asarray(signals[i], dtype=np.float64) for i in ids]
    if len({p.size for p in parts}) != 1:
        raise InvalidInputError("Region signals differ in length")

    total = np.sum(parts, axis=0)
    input_var = float(sum(p.var() for p in parts))
    total_var = float(total.var())
    if total_var <= FLAT_REL * input_var or total_var == 0:
        return Signal1D(np.zeros(total.size), fs), True
    return Signal1D((total - total.mean()) / math.sqrt(total_var), fs), False
