from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..signal import SmSignalSet


class DetectionError(RuntimeError):
    """A detector could not produce a decision for this instance."""


@dataclass
class DetectionResult:
    """Hard decision plus diagnostics.

    Attributes
    ----------
    x_hat : ndarray of int
        Signal-set index per user.
    ml_cost : float
        ``||y - H x_hat||^2``.
    posteriors : ndarray, optional
        ``(K, |S|)`` per-user symbol probabilities (message passing only).
    iterations : int
        Message-passing iterations, or neighbourhood scans summed over
        restarts for local search.
    restarts : int
    ops : int
        Arithmetic operation count (one unit per complex add, subtract or
        multiply), tallied per kernel.
    flags : dict
        Detector-specific counters, e.g. ``variance_clamps``.
    """

    x_hat: np.ndarray
    ml_cost: float
    posteriors: np.ndarray | None = None
    iterations: int = 0
    restarts: int = 0
    ops: int = 0
    flags: dict = field(default_factory=dict)


def as_array(y) -> np.ndarray:
    return np.asarray(getattr(y, "values", y), dtype=complex)


def ml_cost(y: np.ndarray, H: np.ndarray, sset: SmSignalSet, x: np.ndarray) -> float:
    r = y - H @ sset.densify(x)
    return float(np.vdot(r, r).real)


def scaled_columns(H: np.ndarray, sset: SmSignalSet) -> np.ndarray:
    """``G[i, k, s] = h_{i,[k]} s`` for every user ``k`` and member ``s``.

    This is the set of all scaled columns ``h_c * a`` laid out per user.
    """
    N, cols = H.shape
    K = cols // sset.n_t
    Hk = H.reshape(N, K, sset.n_t)
    return Hk[:, :, sset.antenna] * sset.values


def nearest_member(x_soft: np.ndarray, sset: SmSignalSet) -> np.ndarray:
    """Per-user nearest signal-set member to a soft ``K*n_t`` estimate."""
    blocks = x_soft.reshape(-1, sset.n_t)
    V = sset.vectors()
    d = (np.abs(blocks[:, None, :] - V[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d, axis=1)
