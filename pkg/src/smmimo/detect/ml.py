"""Exact ML detection: exhaustive search and a Schnorr-Euchner sphere decoder."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..signal import Alphabet, SmSignalSet, build_sm_signal_set
from ._common import DetectionError, DetectionResult, as_array, ml_cost, scaled_columns

DEFAULT_CAP = 1 << 24
_BLOCK = 1 << 16


def ml_brute_force(y, H: np.ndarray, sset: SmSignalSet, cap: int = DEFAULT_CAP) -> DetectionResult:
    """Exhaustive minimizer of ``||y - Hx||^2`` over all ``|S|^K`` vectors.

    Candidates are visited in lexicographic order (user 0 most significant)
    and the first minimum is kept.
    """
    y = as_array(y)
    J = scaled_columns(H, sset).transpose(1, 2, 0)   # (K, S, N)
    K, S, N = J.shape
    total = S**K
    if total > cap:
        raise DetectionError(
            f"exhaustive search needs {total} candidates, above the cap of {cap}"
        )
    # trailing users are broadcast, leading users looped
    n_inner = 0
    while n_inner < K and S ** (n_inner + 1) <= _BLOCK:
        n_inner += 1
    n_outer = K - n_inner
    inner = np.zeros(N, dtype=complex)[None, :]
    for k in range(n_outer, K):
        inner = (inner[:, None, :] + J[k][None, :, :]).reshape(-1, N)
    best_cost = np.inf
    best = None
    for head in itertools.product(range(S), repeat=n_outer):
        base = y - sum((J[k, s] for k, s in enumerate(head)), np.zeros(N, complex))
        r = base[None, :] - inner
        c = (r.real**2 + r.imag**2).sum(axis=1)
        j = int(np.argmin(c))
        if c[j] < best_cost:
            best_cost = float(c[j])
            tail = np.unravel_index(j, (S,) * n_inner) if n_inner else ()
            best = np.array(list(head) + [int(t) for t in tail], dtype=np.int64)
    return DetectionResult(
        x_hat=best,
        ml_cost=ml_cost(y, H, sset, best),
        ops=total * (3 * N),
    )


def _real_system(y, H, alphabet: Alphabet):
    """Real-valued model ``[Re y; Im y] = B [Re x; Im x]`` with per-dimension levels."""
    K = H.shape[1]
    B = np.block([[H.real, -H.imag], [H.imag, H.real]])
    yr = np.concatenate([y.real, y.imag])
    levels = [alphabet.real_levels] * K + [alphabet.imag_levels] * K
    # single-level dimensions (BPSK imaginary parts) are fixed, not searched
    fixed = [d for d, lv in enumerate(levels) if len(lv) == 1]
    free = [d for d, lv in enumerate(levels) if len(lv) > 1]
    for d in fixed:
        yr = yr - B[:, d] * levels[d][0]
    return B[:, free], yr, [np.asarray(levels[d], float) for d in free], free, levels


def sphere_decode(y, H: np.ndarray, alphabet: Alphabet, cap: int = DEFAULT_CAP) -> DetectionResult:
    """Exact ML detection for single-antenna users by depth-first sphere search.

    Uses the real-valued decomposition, a QR factorization and
    Schnorr-Euchner enumeration (candidates visited in order of distance
    from the layer centre).  The first leaf reached is the Babai point,
    which sets the initial radius; the radius shrinks on every better leaf.

    ``flags['nodes']`` counts visited tree nodes.
    """
    y = as_array(y)
    sset = build_sm_signal_set(1, alphabet)
    B, yr, levels, free, all_levels = _real_system(y, H, alphabet)
    D = B.shape[1]
    if B.shape[0] < D:
        raise DetectionError("sphere decoding needs N >= K")
    Q, R = np.linalg.qr(B)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        if (alphabet.size ** H.shape[1]) <= cap:
            return ml_brute_force(y, H, sset, cap)
        raise DetectionError("rank-deficient channel and exhaustive search above cap")
    zt = Q.T @ yr
    Rl = R.tolist()
    zl = zt.tolist()
    lv = [lev.tolist() for lev in levels]

    best_d = math.inf
    best_x = None
    x = [0.0] * D
    nodes = 0

    # explicit stack: (layer, ordered candidates, position, partial distance)
    def ordered(layer, dist_above):
        row = Rl[layer]
        acc = zl[layer]
        for j in range(layer + 1, D):
            acc -= row[j] * x[j]
        rd = row[layer]
        c = acc / rd
        cands = sorted(lv[layer], key=lambda a: abs(a - c))
        return [(a, dist_above + (rd * (c - a)) ** 2) for a in cands]

    stack = [(D - 1, ordered(D - 1, 0.0), 0)]
    while stack:
        layer, cands, pos = stack.pop()
        if pos >= len(cands):
            continue
        a, d = cands[pos]
        if d >= best_d:
            # later candidates are farther from the centre
            continue
        stack.append((layer, cands, pos + 1))
        nodes += 1
        x[layer] = a
        if layer == 0:
            best_d = d
            best_x = list(x)
        else:
            stack.append((layer - 1, ordered(layer - 1, d), 0))

    full = np.empty(len(all_levels))
    fixed = [d for d in range(full.size) if d not in set(free)]
    for d in fixed:
        full[d] = all_levels[d][0]
    full[free] = best_x
    K = H.shape[1]
    xc = full[:K] + 1j * full[K:]
    lookup = {complex(p): i for i, p in enumerate(alphabet.points)}
    x_hat = np.array([lookup[complex(v)] for v in xc], dtype=np.int64)
    return DetectionResult(
        x_hat=x_hat,
        ml_cost=ml_cost(y, H, sset, x_hat),
        ops=sphere_ops(H.shape[0], D, nodes),
        flags={"nodes": nodes},
    )


def sphere_ops(N: int, D: int, nodes: int) -> int:
    """QR of the ``2N x D`` real system plus the projection, then per-node work."""
    qr = 2 * (2 * N) * D * D
    proj = D * (4 * N - 1)
    return qr + proj + nodes * (2 * D + 4)
