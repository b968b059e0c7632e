from __future__ import annotations

import numpy as np
import scipy.linalg

from ..signal import SmSignalSet
from ._common import DetectionError, DetectionResult, as_array, ml_cost, nearest_member


def mmse_ops(N: int, K: int, sset: SmSignalSet) -> int:
    """Operation count of :func:`mmse_detect` (Cholesky-based solve)."""
    M = K * sset.n_t
    gram = M * (M + 1) // 2 * (2 * N - 1)
    matched = M * (2 * N - 1)
    chol = M**3 // 3 + M
    solves = 2 * M * M
    project = K * sset.size * 3 * sset.n_t
    return gram + matched + chol + solves + project


def mmse_soft(y, H: np.ndarray, noise_variance: float, es: float) -> np.ndarray:
    """Linear MMSE estimate ``(H^H H + (sigma^2/E_s) I)^{-1} H^H y``."""
    y = as_array(y)
    A = H.conj().T @ H
    A[np.diag_indices_from(A)] += noise_variance / es
    b = H.conj().T @ y
    try:
        c = scipy.linalg.cho_factor(A, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise DetectionError("MMSE normal matrix is singular") from exc
    return scipy.linalg.cho_solve(c, b, check_finite=False)


def mmse_detect(y, H: np.ndarray, noise_variance: float, sset: SmSignalSet) -> DetectionResult:
    """MMSE filter followed by a per-user nearest-member projection.

    Each user's ``n_t``-long sub-vector of the soft estimate is quantized to
    the closest member of the SM signal set (ties -> lowest index).
    """
    y = as_array(y)
    x_soft = mmse_soft(y, H, noise_variance, sset.alphabet.average_energy)
    x_hat = nearest_member(x_soft, sset)
    K = H.shape[1] // sset.n_t
    return DetectionResult(
        x_hat=x_hat,
        ml_cost=ml_cost(y, H, sset, x_hat),
        ops=mmse_ops(H.shape[0], K, sset),
    )
