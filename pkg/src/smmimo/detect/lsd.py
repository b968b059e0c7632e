"""Local-search detection over the SM neighbourhood, with restarts.

Two vectors are neighbours when they differ in exactly one user's SM
entry (antenna index, symbol, or both).  Costs of neighbours are obtained
from a cached residual ``z = y - Hx`` by adding back the user's current
scaled column and subtracting the candidate's, which is O(N) per neighbour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signal import SmSignalSet
from ._common import DetectionResult, as_array, ml_cost, scaled_columns
from .linear import mmse_detect
from .mpd import DEFAULT_DAMPING, DEFAULT_ITERATIONS, DEFAULT_TOL, mpd_sm_detect


def enumerate_neighbors(x, sset: SmSignalSet) -> list[np.ndarray]:
    """All ``(|S|-1) K`` neighbours of ``x``, user-major then signal-set order."""
    x = np.asarray(x)
    out = []
    for k in range(x.size):
        for s in range(sset.size):
            if s == x[k]:
                continue
            w = x.copy()
            w[k] = s
            out.append(w)
    return out


@dataclass
class NeighborCostCache:
    """Residual bookkeeping for one local-search walk.

    ``J[k, s]`` is the length-``N`` received contribution of user ``k``
    sending member ``s`` (the scaled-column set, arranged per user).
    """

    J: np.ndarray       # (K, |S|, N)
    x: np.ndarray       # current indices, (K,)
    z: np.ndarray       # y - H x
    cost: float

    def neighbor_cost(self, k: int, s: int) -> float:
        """Cost after replacing user ``k``'s entry by ``s``; cache untouched."""
        w = self.z + self.J[k, self.x[k]] - self.J[k, s]
        return float(np.vdot(w, w).real)

    def scan(self) -> np.ndarray:
        """``(K, |S|)`` costs of every single-user change; own entries are inf."""
        W = (self.z[None, :] + self.J[np.arange(self.x.size), self.x])[:, None, :] - self.J
        c = (W.real**2 + W.imag**2).sum(axis=-1)
        c[np.arange(self.x.size), self.x] = np.inf
        return c

    def apply(self, k: int, s: int) -> None:
        self.z = self.z + self.J[k, self.x[k]] - self.J[k, s]
        self.x = self.x.copy()
        self.x[k] = s
        self.cost = float(np.vdot(self.z, self.z).real)


def column_set(H: np.ndarray, sset: SmSignalSet) -> np.ndarray:
    """``(K, |S|, N)`` array of all scaled columns ``h_c a``."""
    return np.ascontiguousarray(scaled_columns(H, sset).transpose(1, 2, 0))


def make_cost_cache(y, H: np.ndarray, x, sset: SmSignalSet, J=None) -> NeighborCostCache:
    y = as_array(y)
    if J is None:
        J = column_set(H, sset)
    x = np.array(x, dtype=np.int64)
    z = y - J[np.arange(x.size), x].sum(axis=0)
    return NeighborCostCache(J, x, z, float(np.vdot(z, z).real))


def neighbor_cost(cache: NeighborCostCache, move: tuple[int, int]) -> float:
    return cache.neighbor_cost(*move)


def search_ops(N: int, K: int, sset: SmSignalSet, scans: int, restarts: int = 1) -> int:
    """Operation count of the search part.

    ``|A| K n_t N`` for the column set, then per restart ``K(N+1)`` for the
    initial residual, ``2N-1`` for its norm and ``K(|S|-1)(4N-1)`` per
    neighbourhood scan; ``scans`` is summed over restarts.
    """
    A = sset.alphabet.size
    return (
        A * K * sset.n_t * N
        + restarts * (K * (N + 1) + (2 * N - 1))
        + K * (sset.size - 1) * (4 * N - 1) * scans
    )


def local_search(cache: NeighborCostCache, trace: list | None = None) -> int:
    """Steepest strict descent from the cache's state; returns the scan count."""
    scans = 0
    if trace is not None:
        trace.append(cache.cost)
    while True:
        costs = cache.scan()
        scans += 1
        flat = int(np.argmin(costs))
        if not costs.flat[flat] < cache.cost:
            return scans
        cache.apply(*divmod(flat, costs.shape[1]))
        if trace is not None:
            trace.append(cache.cost)


def lsd_sm_detect(y, H: np.ndarray, sset: SmSignalSet, initials, traces: list | None = None) -> DetectionResult:
    """Local search with one restart per initial vector; best final cost wins.

    If ``traces`` is a list, one list of visited costs per restart is
    appended to it.
    """
    y = as_array(y)
    initials = [np.asarray(c) for c in initials]
    if not initials:
        raise ValueError("need at least one initial vector")
    J = column_set(H, sset)
    best = None
    total_scans = 0
    moves = []
    for c in initials:
        cache = make_cost_cache(y, H, c, sset, J)
        trace = [] if traces is not None else None
        scans = local_search(cache, trace)
        if traces is not None:
            traces.append(trace)
        total_scans += scans
        moves.append(scans - 1)
        if best is None or cache.cost < best.cost:
            best = cache
    K = J.shape[0]
    return DetectionResult(
        x_hat=best.x,
        ml_cost=ml_cost(y, H, sset, best.x),
        iterations=total_scans,
        restarts=len(initials),
        ops=search_ops(H.shape[0], K, sset, total_scans, len(initials)),
        flags={"moves": moves},
    )


def lsd_mmse_random(y, H, noise_variance, sset, rng: np.random.Generator, restarts: int = 2) -> DetectionResult:
    """Local search from the MMSE solution, then ``restarts - 1`` random vectors."""
    mm = mmse_detect(y, H, noise_variance, sset)
    K = H.shape[1] // sset.n_t
    initials = [mm.x_hat] + [rng.integers(0, sset.size, K) for _ in range(restarts - 1)]
    res = lsd_sm_detect(y, H, sset, initials)
    res.ops += mm.ops
    return res


def hybrid_detect(
    y,
    H: np.ndarray,
    noise_variance: float,
    sset: SmSignalSet,
    mpd_iterations: int = DEFAULT_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
    tol: float | None = DEFAULT_TOL,
) -> DetectionResult:
    """Message passing, then local search started from its hard decision."""
    mp = mpd_sm_detect(y, H, noise_variance, sset, mpd_iterations, damping, tol)
    res = lsd_sm_detect(y, H, sset, [mp.x_hat])
    res.ops += mp.ops
    res.posteriors = mp.posteriors
    res.flags.update(mp.flags, mpd_iterations=mp.iterations)
    return res
