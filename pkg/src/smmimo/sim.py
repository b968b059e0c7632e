"""Monte Carlo BER, loading-factor and complexity sweeps.

Every trial draws its channel, bits, noise and any detector randomness from
streams keyed by ``(seed, trial, purpose)``, so a trial is fully determined
by its index.  Trials run in fixed-size batches and the stopping rule is
checked only at batch boundaries, in batch order; the results therefore do
not depend on how many worker processes evaluate the batches.

The same trial streams are reused at every SNR point (only the noise scale
changes), which keeps BER curves smooth.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Iterator

import numpy as np

from .channel import SystemConfig, generate_channel, snr_to_noise_variance, transmit
from .detect import (
    DetectionError,
    hybrid_detect,
    lsd_mmse_random,
    ml_brute_force,
    mmse_detect,
    mpd_sm_detect,
    sphere_decode,
)
from .signal import ConfigError, SmSignalSet, bit_errors, build_sm_signal_set, map_bits, qam_alphabet

log = logging.getLogger(__name__)

__all__ = [
    "DETECTORS",
    "DetectorSpec",
    "SystemSpec",
    "TrialPlan",
    "BerRecord",
    "OpCountReport",
    "ErasureError",
    "run_ber_sweep",
    "run_alpha_sweep",
    "run_complexity_sweep",
    "complexity_records",
    "snr_at_ber",
    "wilson_interval",
]

MAX_ERASURE_RATE = 1e-3
_PURPOSE = {"channel": 0, "bits": 1, "noise": 2, "detector": 3}


class ErasureError(RuntimeError):
    """Too many trials in which a detector failed to return a decision."""


# ---------------------------------------------------------------- detectors


def _mmse(y, H, s2, sset, rng):
    return mmse_detect(y, H, s2, sset)


def _mpd(y, H, s2, sset, rng, iterations=20, damping=0.4, tol=1e-6):
    return mpd_sm_detect(y, H, s2, sset, int(iterations), float(damping), tol)


def _lsd(y, H, s2, sset, rng, restarts=2):
    return lsd_mmse_random(y, H, s2, sset, rng, int(restarts))


def _hybrid(y, H, s2, sset, rng, iterations=20, damping=0.4, tol=1e-6):
    return hybrid_detect(y, H, s2, sset, int(iterations), float(damping), tol)


def _sd(y, H, s2, sset, rng):
    if sset.n_t != 1:
        raise ConfigError("sphere decoding needs single-antenna (n_t = 1) streams")
    return sphere_decode(y, H, sset.alphabet)


def _ml(y, H, s2, sset, rng):
    return ml_brute_force(y, H, sset)


# name -> (callable, allowed parameters)
DETECTORS = {
    "mmse": (_mmse, ()),
    "mpd": (_mpd, ("iterations", "damping", "tol")),
    "lsd": (_lsd, ("restarts",)),
    "hybrid": (_hybrid, ("iterations", "damping", "tol")),
    "sd": (_sd, ()),
    "ml": (_ml, ()),
}


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    params: tuple = ()          # sorted (key, value) pairs
    label: str = ""             # reported name; defaults to ``name``

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.name)
        if self.name not in DETECTORS:
            raise ConfigError(f"unknown detector {self.name!r}; known: {sorted(DETECTORS)}")
        allowed = DETECTORS[self.name][1]
        for key, _ in self.params:
            if key not in allowed:
                raise ConfigError(f"detector {self.name!r} has no parameter {key!r}")

    @classmethod
    def make(cls, name, label="", **params):
        return cls(name, tuple(sorted(params.items())), label)

    def __call__(self, y, H, s2, sset, rng):
        return DETECTORS[self.name][0](y, H, s2, sset, rng, **dict(self.params))


@dataclass(frozen=True)
class SystemSpec:
    """One transmission scheme.

    ``streams == 1`` is SM with ``n_t`` antennas and one RF chain (``n_t = 1``
    is single-stream massive MIMO).  ``streams > 1`` is conventional
    multi-stream MIMO with ``n_t = n_rf = streams``; each stream is then
    treated as its own single-antenna transmitter, and the noise is set so
    the total received power per user matches the single-stream systems.
    """

    name: str
    n_t: int
    order: int
    detectors: tuple[DetectorSpec, ...]
    streams: int = 1

    def __post_init__(self):
        if self.streams < 1:
            raise ConfigError("streams must be >= 1")
        if self.streams > 1 and self.n_t != self.streams:
            raise ConfigError("multi-stream systems need n_t equal to streams")
        if not self.detectors:
            raise ConfigError(f"system {self.name!r} has no detectors")
        sset = self.signal_set()
        for d in self.detectors:
            if d.name == "sd" and sset.n_t != 1:
                raise ConfigError(
                    f"system {self.name!r}: sphere decoding needs n_t = 1 or multi-stream"
                )

    def signal_set(self) -> SmSignalSet:
        n_t = 1 if self.streams > 1 else self.n_t
        return build_sm_signal_set(n_t, qam_alphabet(self.order))

    def config(self, K: int, N: int, power_profile=None) -> SystemConfig:
        prof = None if power_profile is None else np.repeat(power_profile, self.streams)
        return SystemConfig(K * self.streams, N, self.signal_set(), prof)

    @property
    def bits_per_user(self) -> int:
        return self.streams * self.signal_set().bits_per_use


@dataclass(frozen=True)
class TrialPlan:
    """Everything needed to run one system over a grid."""

    system: SystemSpec
    K: int
    N: int
    snr_db: tuple[float, ...]
    seed: int = 0
    alpha: tuple[float, ...] = ()
    min_errors: int = 100
    max_trials: int = 10**7
    batch: int = 32
    power_profile: tuple[float, ...] | None = None
    scenario: str = ""

    def __post_init__(self):
        if self.K < 1 and not self.alpha:
            raise ConfigError("K must be >= 1")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if not self.snr_db:
            raise ConfigError("empty SNR grid")
        if self.batch < 1 or self.max_trials < 1:
            raise ConfigError("batch and max_trials must be positive")
        if self.min_errors < 0:
            raise ConfigError("min_errors must be non-negative")

    def users_for_alpha(self, a: float) -> int:
        k = a * self.N
        if abs(k - round(k)) > 1e-9:
            raise ConfigError(f"alpha={a} gives non-integral K = {k} for N = {self.N}")
        if round(k) < 1:
            raise ConfigError(f"alpha={a} gives K = 0")
        return int(round(k))


@dataclass
class BerRecord:
    scenario: str
    system: str
    detector: str
    K: int
    N: int
    snr_db: float
    trials: int
    bits: int
    errors: int
    erasures: int = 0
    total_ops: int = 0
    total_iters: int = 0
    signal_energy: float = 0.0      # sum over trials of ||Hx||^2 / N
    noise_variance: float = 0.0
    violations: int = 0             # detector-reported invariant violations

    @property
    def alpha(self) -> float:
        return self.K / self.N

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.bits)

    @property
    def ci_halfwidth(self) -> float:
        lo, hi = self.ci
        return 0.5 * (hi - lo)

    @property
    def mean_ops(self) -> float:
        return self.total_ops / self.trials if self.trials else float("nan")

    @property
    def mean_iters(self) -> float:
        return self.total_iters / self.trials if self.trials else float("nan")

    @property
    def measured_snr(self) -> float:
        """Average received signal power per antenna over the noise variance."""
        if not self.trials or self.noise_variance == 0:
            return float("inf")
        return self.signal_energy / self.trials / self.noise_variance


@dataclass
class OpCountReport:
    detector: str
    system: str
    alpha: list[float] = field(default_factory=list)
    mean_ops: list[float] = field(default_factory=list)
    mean_iters: list[float] = field(default_factory=list)


def wilson_interval(errors: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = errors / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == n else min(1.0, centre + half)
    return lo, hi


# ---------------------------------------------------------------- trial engine


def _stream(seed: int, trial: int, purpose: str, sub: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial, _PURPOSE[purpose], sub))
    return np.random.default_rng(ss)


def _run_batch(system: SystemSpec, K: int, N: int, profile, noise_vars, seed, start, stop):
    """Sum of per-detector statistics over trials ``start..stop-1`` at each noise level.

    Returns an array of shape (points, detectors, 7): errors, trials,
    erasures, ops, iterations, signal energy, invariant violations.
    """
    cfg = system.config(K, N, profile)
    sset = cfg.sm_set
    dets = system.detectors
    out = np.zeros((len(noise_vars), len(dets), 7))
    nb = sset.bits_per_use
    for t in range(start, stop):
        H = generate_channel(cfg, _stream(seed, t, "channel"))
        bits = _stream(seed, t, "bits").integers(0, 2, (cfg.K, nb))
        x = map_bits(bits, sset)
        clean_energy = float(np.sum(np.abs(H @ sset.densify(x)) ** 2)) / N
        for p, s2 in enumerate(noise_vars):
            rx = transmit(x, H, sset, s2, _stream(seed, t, "noise"))
            for d, det in enumerate(dets):
                try:
                    res = det(rx.values, H, s2, sset, _stream(seed, t, "detector", d))
                except DetectionError as exc:
                    log.warning("trial %d, %s: %s", t, det.label, exc)
                    out[p, d, 2] += 1
                    continue
                out[p, d, 0] += bit_errors(x, res.x_hat, sset)
                out[p, d, 1] += 1
                out[p, d, 3] += res.ops
                out[p, d, 4] += res.iterations
                out[p, d, 5] += clean_energy
                out[p, d, 6] += res.flags.get("invariant_violations", 0)
    return out


def _batch_results(fn, n_batches_max: int, workers: int) -> Iterator[np.ndarray]:
    if workers <= 1:
        for b in range(n_batches_max):
            yield fn(b)
        return
    ex = ProcessPoolExecutor(workers)
    try:
        pending = deque(ex.submit(fn, b) for b in range(min(workers, n_batches_max)))
        nxt = len(pending)
        while pending:
            res = pending.popleft().result()
            if nxt < n_batches_max:
                pending.append(ex.submit(fn, nxt))
                nxt += 1
            yield res
    finally:
        ex.shutdown(wait=True, cancel_futures=True)


def _batch_fn(plan: TrialPlan, K, noise_vars, b):
    start = b * plan.batch
    stop = min(start + plan.batch, plan.max_trials)
    return _run_batch(plan.system, K, plan.N, plan.power_profile, noise_vars,
                      plan.seed, start, stop)


def _run_points(plan: TrialPlan, K: int, snrs, workers: int) -> list[BerRecord]:
    cfg = plan.system.config(K, plan.N, plan.power_profile)
    noise_vars = tuple(
        0.0 if math.isinf(s) and s > 0 else snr_to_noise_variance(s, cfg) for s in snrs
    )
    n_batches = -(-plan.max_trials // plan.batch)
    bits_per_trial = cfg.K * cfg.sm_set.bits_per_use
    ndet = len(plan.system.detectors)
    # each point has its own stopping decision
    records = []
    for p, s2 in enumerate(noise_vars):
        acc = np.zeros((ndet, 7))
        fn = partial(_batch_fn, plan, K, (s2,))
        for res in _batch_results(fn, n_batches, workers):
            acc += res[0]
            done = acc[:, 1] + acc[:, 2] >= plan.max_trials
            enough = acc[:, 0] >= plan.min_errors if plan.min_errors > 0 else done
            if np.all(enough | done):
                break
        for d, det in enumerate(plan.system.detectors):
            errors, trials, erased, ops, iters, energy, viol = acc[d]
            total = trials + erased
            if total and erased / total > MAX_ERASURE_RATE:
                raise ErasureError(
                    f"{plan.system.name}/{det.label} at {snrs[p]} dB: "
                    f"{int(erased)} of {int(total)} trials erased"
                )
            records.append(
                BerRecord(
                    scenario=plan.scenario,
                    system=plan.system.name,
                    detector=det.label,
                    K=K,
                    N=plan.N,
                    snr_db=float(snrs[p]),
                    trials=int(trials),
                    bits=int(trials) * bits_per_trial,
                    errors=int(errors),
                    erasures=int(erased),
                    total_ops=int(ops),
                    total_iters=int(iters),
                    signal_energy=float(energy),
                    noise_variance=s2,
                    violations=int(viol),
                )
            )
            log.info("%s %s K=%d snr=%s: ber=%.3g (%d trials)", plan.system.name,
                     det.label, K, snrs[p], records[-1].ber, int(trials))
    return records


def run_ber_sweep(plan: TrialPlan, workers: int = 1) -> list[BerRecord]:
    """BER of every detector of ``plan.system`` at each SNR in ``plan.snr_db``.

    At each point trials continue until every detector has ``min_errors``
    bit errors or ``max_trials`` trials have run; ``min_errors = 0`` runs
    exactly ``max_trials`` trials.  ``inf`` in the SNR grid
    means a noiseless channel.
    """
    return _run_points(plan, plan.K, plan.snr_db, workers)


def run_alpha_sweep(plan: TrialPlan, workers: int = 1) -> list[BerRecord]:
    """BER against loading factor: ``K = alpha * N`` for each alpha, fixed SNR."""
    if not plan.alpha:
        raise ConfigError("empty alpha grid")
    out = []
    for a in plan.alpha:
        out.extend(_run_points(plan, plan.users_for_alpha(a), plan.snr_db, workers))
    return out


def complexity_records(plan: TrialPlan, trials: int = 32, workers: int = 1) -> list[BerRecord]:
    """Fixed-length loading-factor sweep (``trials`` per point) used for op counts."""
    fixed = replace(plan, min_errors=0, max_trials=trials, batch=min(plan.batch, trials))
    return run_alpha_sweep(fixed, workers)


def run_complexity_sweep(plan: TrialPlan, trials: int = 32, workers: int = 1) -> list[OpCountReport]:
    """Mean operation count per detection at every loading factor."""
    reports = {}
    for r in complexity_records(plan, trials, workers):
        rep = reports.setdefault((r.system, r.detector), OpCountReport(r.detector, r.system))
        rep.alpha.append(r.alpha)
        rep.mean_ops.append(r.mean_ops)
        rep.mean_iters.append(r.mean_iters)
    return list(reports.values())


def snr_at_ber(records: list[BerRecord], target: float = 1e-3) -> float:
    """SNR where the BER curve crosses ``target``, by log-linear interpolation.

    ``records`` are the points of one curve.  Returns ``nan`` if the curve
    does not bracket the target.
    """
    pts = sorted((r.snr_db, r.ber) for r in records if r.bits)
    lt = math.log10(target)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target >= b1 and b0 > 0:
            if b1 == 0:
                return s1
            l0, l1 = math.log10(b0), math.log10(b1)
            if l0 == l1:
                return s0
            return s0 + (l0 - lt) * (s1 - s0) / (l0 - l1)
    return float("nan")
