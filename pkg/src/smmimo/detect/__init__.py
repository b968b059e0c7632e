"""Detectors for multiuser SM-MIMO and conventional MIMO."""

from ._common import DetectionError, DetectionResult, ml_cost, nearest_member, scaled_columns
from .linear import mmse_detect, mmse_ops, mmse_soft
from .lsd import (
    NeighborCostCache,
    column_set,
    enumerate_neighbors,
    hybrid_detect,
    local_search,
    lsd_mmse_random,
    lsd_sm_detect,
    make_cost_cache,
    neighbor_cost,
    search_ops,
)
from .ml import ml_brute_force, sphere_decode
from .mpd import MessageState, interference_moments, mpd_ops, mpd_sm_detect

__all__ = [
    "DetectionError",
    "DetectionResult",
    "MessageState",
    "NeighborCostCache",
    "column_set",
    "enumerate_neighbors",
    "hybrid_detect",
    "interference_moments",
    "local_search",
    "lsd_mmse_random",
    "lsd_sm_detect",
    "make_cost_cache",
    "ml_brute_force",
    "ml_cost",
    "mmse_detect",
    "mmse_ops",
    "mmse_soft",
    "mpd_ops",
    "mpd_sm_detect",
    "nearest_member",
    "neighbor_cost",
    "scaled_columns",
    "search_ops",
    "sphere_decode",
]
