"""Message-passing detection over the fully connected user/antenna graph.

The interference seen by user ``k`` at antenna ``i`` is approximated as
Gaussian with moments taken under the other users' current messages.
Messages are held as an ``(N, K, |S|)`` array ``p[i, k, s]`` (message from
user ``k`` to antenna ``i``) and all likelihood arithmetic is done in the
log domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from ..signal import SmSignalSet
from ._common import DetectionResult, as_array, ml_cost, scaled_columns

DEFAULT_ITERATIONS = 20
DEFAULT_DAMPING = 0.4
DEFAULT_TOL = 1e-6
NORM_TOL = 1e-9


@dataclass
class MessageState:
    """Snapshot after an iteration; passed to the optional callback."""

    p: np.ndarray          # (N, K, |S|) messages
    mu: np.ndarray         # (N, K) extrinsic interference means
    var: np.ndarray        # (N, K) extrinsic variances after clamping
    var_raw: np.ndarray    # (N, K) before clamping
    log_post: np.ndarray   # (K, |S|) normalized log posteriors
    t: int
    damping: float
    change: float          # max total-variation change of any message


def interference_moments(p, G, A, noise_variance):
    """Extrinsic mean and variance of the interference at each (antenna, user).

    Computes all-user totals, then removes each user's own term.

    Returns ``mu_own, m2_own, mu, var`` where the ``_own`` arrays are the
    per-user contributions ``sum_s p h s`` and ``sum_s p |h s|^2``.
    """
    mu_own = np.einsum("iks,iks->ik", p, G)
    m2_own = np.einsum("iks,iks->ik", p, A)
    var_own = m2_own - np.abs(mu_own) ** 2
    mu_tot = mu_own.sum(axis=1)
    var_tot = var_own.sum(axis=1) + noise_variance
    mu = mu_tot[:, None] - mu_own
    var = var_tot[:, None] - m2_own + np.abs(mu_own) ** 2
    return mu_own, m2_own, mu, var


def mpd_ops(N: int, K: int, S: int, iterations: int) -> int:
    """Operation count for ``iterations`` rounds (one unit per add/sub/mul)."""
    setup = 2 * N * K * S                       # scaled columns and |.|^2
    moments = 4 * N * K * S + 6 * N * K         # p*G, p*A sums, totals, extrinsic
    loglik = 5 * N * K * S + 2 * N * K          # residual, |r|^2, /2var, sum over i
    extrinsic = 2 * N * K * S + N * K           # + ln p_k + ln sigma, - own term
    update = 5 * N * K * S                      # exp, damping, renormalize
    return setup + iterations * (moments + loglik + extrinsic + update)


def mpd_sm_detect(
    y,
    H: np.ndarray,
    noise_variance: float,
    sset: SmSignalSet,
    iterations: int = DEFAULT_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
    tol: float | None = DEFAULT_TOL,
    callback: Callable[[MessageState], None] | None = None,
) -> DetectionResult:
    """Message-passing detector for multiuser SM.

    Parameters
    ----------
    y : array_like or ReceivedVector
    H : ndarray, shape (N, K*n_t)
    noise_variance : float
        Zero is replaced by a tiny floor relative to the received power.
    sset : SmSignalSet
    iterations : int
        Maximum number of message-passing rounds.
    damping : float
        ``delta`` in (0, 1]; weight kept on the previous message.
    tol : float or None
        Stop early once no message moves by more than ``tol`` in total
        variation.  ``None`` always runs ``iterations`` rounds.
    callback : callable, optional
        Called with a :class:`MessageState` after every round.

    Returns
    -------
    DetectionResult
        ``posteriors`` holds the final per-user probabilities, and
        ``flags['variance_clamps']`` counts variances raised to the noise
        floor.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    y = as_array(y)
    if noise_variance == 0:
        noise_variance = 1e-12 * max(float(np.mean(np.abs(y) ** 2)), 1e-300)
    N = H.shape[0]
    S = sset.size
    G = scaled_columns(H, sset)               # (N, K, S)
    A = G.real**2 + G.imag**2
    K = G.shape[1]
    p = np.full((N, K, S), 1.0 / S)
    clamps = 0
    violations = 0
    t = 0
    for t in range(1, iterations + 1):
        _, _, mu, var_raw = interference_moments(p, G, A, noise_variance)
        low = var_raw < noise_variance
        clamps += int(np.count_nonzero(low))
        var = np.where(low, noise_variance, var_raw)

        r = (y[:, None] - mu)[:, :, None] - G
        e = (r.real**2 + r.imag**2) / (2.0 * var[:, :, None])   # (N, K, S)
        log_post = -e.sum(axis=0)
        log_post -= logsumexp(log_post, axis=1, keepdims=True)

        # extrinsic: drop antenna i's own term from the user posterior
        lt = log_post[None, :, :] + 0.5 * np.log(var)[:, :, None] + e
        lt -= lt.max(axis=2, keepdims=True)
        new = np.exp(lt)
        new /= new.sum(axis=2, keepdims=True)
        new = (1.0 - damping) * new + damping * p
        new /= new.sum(axis=2, keepdims=True)

        violations += int(np.count_nonzero(np.abs(new.sum(axis=2) - 1.0) > NORM_TOL))
        violations += int(np.count_nonzero(var < 0))
        change = 0.5 * float(np.abs(new - p).sum(axis=2).max())
        p = new
        if callback is not None:
            callback(MessageState(p, mu, var, var_raw, log_post, t, damping, change))
        if tol is not None and change < tol:
            break

    post = np.exp(log_post)
    x_hat = np.argmax(log_post, axis=1)
    return DetectionResult(
        x_hat=x_hat,
        ml_cost=ml_cost(y, H, sset, x_hat),
        posteriors=post,
        iterations=t,
        ops=mpd_ops(N, K, S, t),
        flags={"variance_clamps": clamps, "invariant_violations": violations},
    )
