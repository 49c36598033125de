"""Road-event timing search: local speed extremes and the influential ones.

The influential pairs delimit braking road events; the selection sweeps
candidate minima, requiring a prior qualifying speed drop and that the
candidate attains the lowest speed among qualifying rise-minima in its
forward slice. The threshold defaults to 5 m/s. The pseudocode's
``v_min != 0`` guard is kept behind ``alg1_zero_guard="literal"``; with
the guard on, braking events that end in a full stop are never selected,
so the shipped default is ``"off"``.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .config import PipelineConfig
from .errors import DegenerateSeriesError
from .model import ExtremeSet


def find_local_extremes(v):
    """Local minima/maxima of a speed series (plateau-collapsed, endpoints eligible)."""
    v = np.asarray(v, dtype=float)
    if len(v) < 3:
        raise DegenerateSeriesError(
            f"need at least 3 samples to classify extremes, got {len(v)}")
    return kernels.local_extremes(v)


def select_influential_extremes(v, k_min, k_max, threshold=5.0,
                                zero_guard="off"):
    """Influential (min, max) index arrays for a precomputed extreme set."""
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    literal = zero_guard == "literal"
    return kernels.select_influential(
        np.asarray(v, dtype=float),
        np.asarray(k_min, dtype=np.int64),
        np.asarray(k_max, dtype=np.int64),
        float(threshold), literal)


def search_events(v, config: PipelineConfig | None = None) -> ExtremeSet:
    """Run the full road-event timing search and package the result."""
    config = config or PipelineConfig()
    k_min, k_max = find_local_extremes(v)
    inf_min, inf_max = select_influential_extremes(
        v, k_min, k_max, threshold=config.threshold_mps,
        zero_guard=config.alg1_zero_guard)
    return ExtremeSet(k_min=tuple(k_min), k_max=tuple(k_max),
                      k_inf_min=tuple(inf_min), k_inf_max=tuple(inf_max))
