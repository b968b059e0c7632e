"""Multiuser channel, received-signal model and the SNR convention.

SNR convention
--------------
``snr_db`` is the average received signal-to-noise ratio per BS antenna.
With unit-variance channel gains each active transmit stream contributes
``E_s`` of signal power per receive antenna, so

    sigma^2 = K * E_s / 10**(snr_db / 10)

where ``K`` counts active streams (users for SM and single-stream MIMO).
Scaling the constellation leaves results unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signal import ConfigError, SmSignalSet

__all__ = [
    "SystemConfig",
    "ReceivedVector",
    "generate_channel",
    "channel_block",
    "transmit",
    "snr_to_noise_variance",
]


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """``K`` users with ``N`` BS antennas, each user drawing from ``sm_set``.

    ``power_profile`` holds the per-user channel variances and must sum to
    ``K``; the default (all ones) is perfect power control.
    """

    K: int
    N: int
    sm_set: SmSignalSet
    power_profile: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.power_profile is None:
            prof = np.ones(self.K)
        else:
            prof = np.asarray(self.power_profile, dtype=float)
            if prof.shape != (self.K,):
                raise ConfigError(
                    f"power_profile must have K={self.K} entries, got {prof.size}"
                )
            if np.any(prof <= 0):
                raise ConfigError("power_profile entries must be positive")
            if abs(prof.sum() - self.K) > 1e-12 * max(self.K, 1) + 1e-12:
                raise ConfigError(
                    f"power_profile must sum to K={self.K} (sum sigma_k^2 = K), "
                    f"got {prof.sum():.12g}"
                )
        prof.setflags(write=False)
        object.__setattr__(self, "power_profile", prof)

    @property
    def n_t(self) -> int:
        return self.sm_set.n_t

    @property
    def loading_factor(self) -> float:
        return self.K / self.N

    @property
    def num_columns(self) -> int:
        return self.K * self.sm_set.n_t

    @property
    def bits_per_use(self) -> int:
        """Bits per channel use for the whole system."""
        return self.K * self.sm_set.bits_per_use


@dataclass(frozen=True, eq=False)
class ReceivedVector:
    values: np.ndarray
    noise_variance: float


def generate_channel(config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``N x K*n_t`` i.i.d. circular complex Gaussian channel.

    Columns of user ``k`` have variance ``power_profile[k]`` per complex entry.
    """
    shape = (config.N, config.num_columns)
    h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    scale = np.sqrt(np.repeat(config.power_profile, config.n_t) / 2.0)
    return h * scale


def channel_block(H: np.ndarray, i: int, k: int, n_t: int) -> np.ndarray:
    """Row block ``h_{i,[k]}``: gains from user ``k``'s antennas to BS antenna ``i``."""
    return H[i, k * n_t:(k + 1) * n_t]


def transmit(
    x: np.ndarray,
    H: np.ndarray,
    sset: SmSignalSet,
    noise_variance: float,
    rng: np.random.Generator | None = None,
) -> ReceivedVector:
    """Received vector ``y = Hx + n`` for signal-set indices ``x`` (one per user).

    Uses the sparse form: one active column per user.
    """
    x = np.asarray(x)
    K = x.size
    if H.shape[1] != K * sset.n_t:
        raise ValueError(
            f"channel has {H.shape[1]} columns, expected K*n_t = {K * sset.n_t}"
        )
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    cols = np.arange(K) * sset.n_t + sset.antenna[x]
    y = H[:, cols] @ sset.values[x]
    if noise_variance > 0:
        if rng is None:
            raise ValueError("rng required for noisy transmission")
        n = rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)
        y = y + np.sqrt(noise_variance / 2.0) * n
    return ReceivedVector(y, float(noise_variance))


def snr_to_noise_variance(snr_db: float, config: SystemConfig) -> float:
    """Noise variance for an average per-antenna received SNR of ``snr_db``."""
    es = config.sm_set.alphabet.average_energy
    return config.K * es / 10.0 ** (snr_db / 10.0)
