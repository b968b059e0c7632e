"""Modulation alphabets, spatial-modulation signal sets and bit mapping.

Signal-set members are addressed by a flat integer index
``idx = antenna * |A| + symbol`` (both zero based), which is the
antenna-major order used throughout the package.  A transmit vector for
``K`` users is then just an integer array of length ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "Alphabet",
    "SmSignalSet",
    "qam_alphabet",
    "build_sm_signal_set",
    "map_bits",
    "demap",
    "bit_errors",
]

SUPPORTED_ORDERS = (2, 4, 8, 16, 64)


class ConfigError(ValueError):
    """Raised for invalid system or experiment parameters."""


def _gray_pam(num_bits: int) -> np.ndarray:
    """Amplitude levels of a Gray-labelled PAM, indexed by label.

    Label 0 sits on the largest positive level, so BPSK maps 0 -> +1.
    """
    m = 1 << num_bits
    labels = np.arange(m)
    # gray -> binary position
    pos = labels.copy()
    shift = labels >> 1
    while shift.any():
        pos ^= shift
        shift >>= 1
    return (m - 1) - 2.0 * pos


@dataclass(frozen=True, eq=False)
class Alphabet:
    """A finite complex constellation.

    ``points[l]`` carries the Gray label ``l`` (MSB first), so the symbol
    index and the symbol bits are the same integer.
    """

    points: np.ndarray
    name: str = ""
    # per-dimension PAM levels (sorted ascending), used by the sphere decoder
    real_levels: np.ndarray | None = None
    imag_levels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 1 or pts.size < 2:
            raise ConfigError("alphabet needs at least two points")
        if pts.size & (pts.size - 1):
            raise ConfigError(f"alphabet size {pts.size} is not a power of two")
        if np.unique(pts).size != pts.size:
            raise ConfigError("alphabet points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.size.bit_length() - 1

    @property
    def average_energy(self) -> float:
        return float(np.mean(self.points.real**2 + self.points.imag**2))

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Alphabet({self.name or self.size})"


def qam_alphabet(order: int) -> Alphabet:
    """Gray-mapped rectangular QAM on the odd-integer grid.

    Parameters
    ----------
    order : int
        One of 2 (BPSK on the real axis), 4, 8 (4x2 rectangular), 16, 64.

    Returns
    -------
    Alphabet
        Points are unnormalized, e.g. ``+-1 +-1j`` for 4-QAM, so the average
        energy is 1, 2, 6, 10 and 42 respectively.
    """
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(
            f"unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS}"
        )
    nbits = order.bit_length() - 1
    if order == 2:
        re = _gray_pam(1)
        return Alphabet(re.astype(complex), "BPSK", np.sort(re), np.zeros(1))
    bits_i = (nbits + 1) // 2
    bits_q = nbits - bits_i
    pam_i = _gray_pam(bits_i)
    pam_q = _gray_pam(bits_q)
    labels = np.arange(order)
    # high bits -> in-phase, low bits -> quadrature
    pts = pam_i[labels >> bits_q] + 1j * pam_q[labels & ((1 << bits_q) - 1)]
    return Alphabet(pts, f"{order}-QAM", np.sort(pam_i), np.sort(pam_q))


@dataclass(frozen=True, eq=False)
class SmSignalSet:
    """The per-user SM transmit set: one active antenna out of ``n_t``.

    Member ``idx`` has value ``alphabet.points[idx % |A|]`` on antenna
    ``idx // |A|``.  With ``n_t == 1`` this is the plain alphabet.
    """

    n_t: int
    alphabet: Alphabet
    antenna: np.ndarray = field(init=False, repr=False)
    symbol: np.ndarray = field(init=False, repr=False)
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_t < 1:
            raise ConfigError(f"n_t must be >= 1, got {self.n_t}")
        idx = np.arange(self.n_t * self.alphabet.size)
        ant, sym = np.divmod(idx, self.alphabet.size)
        vals = self.alphabet.points[sym]
        for arr in (ant, sym, vals):
            arr.setflags(write=False)
        object.__setattr__(self, "antenna", ant)
        object.__setattr__(self, "symbol", sym)
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return self.n_t * self.alphabet.size

    def __len__(self):
        return self.size

    @property
    def antenna_bits(self) -> int:
        return self.n_t.bit_length() - 1

    @property
    def bits_per_use(self) -> int:
        return self.alphabet.bits_per_symbol + self.antenna_bits

    @property
    def num_mapped(self) -> int:
        """Number of members reachable by the bit map (``2**bits_per_use``)."""
        return 1 << self.bits_per_use

    def vectors(self) -> np.ndarray:
        """Dense ``(|S|, n_t)`` array of all members, in index order."""
        out = np.zeros((self.size, self.n_t), dtype=complex)
        out[np.arange(self.size), self.antenna] = self.values
        return out

    def densify(self, x: np.ndarray) -> np.ndarray:
        """Expand per-user indices (length ``K``) to the length ``K*n_t`` vector."""
        x = np.asarray(x)
        dense = np.zeros(x.size * self.n_t, dtype=complex)
        dense[np.arange(x.size) * self.n_t + self.antenna[x]] = self.values[x]
        return dense

    def index(self, antenna: int, symbol: int) -> int:
        return antenna * self.alphabet.size + symbol

    def split(self, idx: int) -> tuple[int, int]:
        """(antenna, symbol) pair of a member, both zero based."""
        return int(self.antenna[idx]), int(self.symbol[idx])

    def __repr__(self):
        return f"SmSignalSet(n_t={self.n_t}, {self.alphabet!r})"


def build_sm_signal_set(n_t: int, alphabet: Alphabet) -> SmSignalSet:
    return SmSignalSet(n_t, alphabet)


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


def map_bits(bits, sset: SmSignalSet) -> np.ndarray:
    """Map bits to signal-set indices.

    ``bits`` has shape ``(..., bits_per_use)``; the leading
    ``floor(log2 n_t)`` bits choose the antenna (natural binary), the rest
    are the Gray label of the symbol.  Returns integer indices of shape
    ``bits.shape[:-1]``.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1:] != (sset.bits_per_use,):
        raise ValueError(
            f"expected {sset.bits_per_use} bits per user, got shape {bits.shape}"
        )
    nb_ant = sset.antenna_bits
    ant = _bits_to_int(bits[..., :nb_ant]) if nb_ant else np.zeros(bits.shape[:-1], int)
    sym = _bits_to_int(bits[..., nb_ant:])
    return ant * sset.alphabet.size + sym


def demap(x, sset: SmSignalSet) -> np.ndarray:
    """Inverse of :func:`map_bits`; returns bits of shape ``(..., bits_per_use)``."""
    x = np.asarray(x, dtype=np.int64)
    if np.any((x < 0) | (x >= sset.size)):
        raise ValueError("signal-set index out of range")
    ant, sym = np.divmod(x, sset.alphabet.size)
    # antennas beyond 2**antenna_bits carry no bits; their index bits wrap
    word = ((ant & ((1 << sset.antenna_bits) - 1)) << sset.alphabet.bits_per_symbol) | sym
    shifts = np.arange(sset.bits_per_use - 1, -1, -1)
    return (word[..., None] >> shifts) & 1


def bit_errors(x_true, x_hat, sset: SmSignalSet) -> int:
    """Hamming distance between the demapped bit strings of two index arrays."""
    return int(np.count_nonzero(demap(x_true, sset) != demap(x_hat, sset)))
