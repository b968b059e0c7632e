import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smmimo import (
    ConfigError,
    bit_errors,
    build_sm_signal_set,
    demap,
    map_bits,
    qam_alphabet,
)


def test_qam4_points_in_listed_order():
    a = qam_alphabet(4)
    np.testing.assert_array_equal(a.points, [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
    assert a.bits_per_symbol == 2
    assert a.average_energy == 2.0


def test_bpsk_real_axis():
    a = qam_alphabet(2)
    np.testing.assert_array_equal(a.points, [1, -1])
    assert a.average_energy == 1.0


def test_qam16_grid_and_energy():
    a = qam_alphabet(16)
    grid = {complex(r, i) for r in (-3, -1, 1, 3) for i in (-3, -1, 1, 3)}
    assert set(a.points.tolist()) == grid
    # enumerate the 16 points directly
    assert a.average_energy == pytest.approx(sum(abs(p) ** 2 for p in grid) / 16)
    assert a.average_energy == pytest.approx(10.0)


@pytest.mark.parametrize("order,energy", [(8, 6.0), (64, 42.0)])
def test_other_orders(order, energy):
    a = qam_alphabet(order)
    assert a.size == order
    assert a.average_energy == pytest.approx(energy)


@pytest.mark.parametrize("order", [3, 32, 0, 256])
def test_unsupported_order(order):
    with pytest.raises(ConfigError, match=str(order)):
        qam_alphabet(order)


@pytest.mark.parametrize("order", [4, 8, 16, 64])
def test_gray_adjacency(order):
    a = qam_alphabet(order)
    pts = a.points
    for l, p in enumerate(pts):
        for m, q in enumerate(pts):
            if abs(abs(p - q) - 2.0) < 1e-12:  # nearest grid neighbours
                assert bin(l ^ m).count("1") == 1


def test_sm_set_nt2_qam4_listed_vectors():
    s = build_sm_signal_set(2, qam_alphabet(4))
    expected = np.array(
        [
            [1 + 1j, 0], [1 - 1j, 0], [-1 + 1j, 0], [-1 - 1j, 0],
            [0, 1 + 1j], [0, 1 - 1j], [0, -1 + 1j], [0, -1 - 1j],
        ]
    )
    np.testing.assert_array_equal(s.vectors(), expected)


def test_sm_set_degenerates_to_alphabet():
    a = qam_alphabet(16)
    s = build_sm_signal_set(1, a)
    assert s.size == 16
    np.testing.assert_array_equal(s.vectors()[:, 0], a.points)


def test_sm_set_nt4_qam4():
    s = build_sm_signal_set(4, qam_alphabet(4))
    assert s.size == 16
    assert s.bits_per_use == 4
    # K=3 users -> 12 bpcu
    assert 3 * s.bits_per_use == 12


@pytest.mark.parametrize("n_t", [1, 2, 3, 4, 8])
@pytest.mark.parametrize("order", [2, 4, 16, 64])
def test_sm_set_one_nonzero_per_vector(n_t, order):
    s = build_sm_signal_set(n_t, qam_alphabet(order))
    V = s.vectors()
    assert V.shape == (n_t * order, n_t)
    assert np.all(np.count_nonzero(V, axis=1) == 1)
    assert s.bits_per_use == int(np.log2(order)) + int(np.floor(np.log2(n_t)))


def test_sm_set_rejects_zero_antennas():
    with pytest.raises(ConfigError):
        build_sm_signal_set(0, qam_alphabet(4))


def test_map_all_zero_bits():
    s = build_sm_signal_set(4, qam_alphabet(4))
    idx = map_bits([0, 0, 0, 0], s)
    assert s.split(idx) == (0, 0)
    np.testing.assert_array_equal(demap(s.index(0, 0), s), [0, 0, 0, 0])


def test_map_nt1_uses_symbol_bits_only():
    s = build_sm_signal_set(1, qam_alphabet(16))
    assert s.antenna_bits == 0
    for word in range(16):
        bits = [(word >> b) & 1 for b in (3, 2, 1, 0)]
        assert s.split(map_bits(bits, s)) == (0, word)


def test_map_wrong_length():
    s = build_sm_signal_set(4, qam_alphabet(4))
    with pytest.raises(ValueError):
        map_bits([0, 1, 0], s)


def test_demap_out_of_range():
    s = build_sm_signal_set(2, qam_alphabet(2))
    with pytest.raises(ValueError):
        demap(4, s)


@pytest.mark.parametrize("n_t", [1, 2, 4, 8])
@pytest.mark.parametrize("order", [2, 4, 8, 16, 64])
def test_map_demap_bijection(n_t, order):
    s = build_sm_signal_set(n_t, qam_alphabet(order))
    nb = s.bits_per_use
    all_bits = np.array(list(itertools.product([0, 1], repeat=nb)))
    idx = map_bits(all_bits, s)
    assert len(set(idx.tolist())) == 2**nb
    np.testing.assert_array_equal(demap(idx, s), all_bits)


def test_non_power_of_two_antennas_keep_all_vectors():
    s = build_sm_signal_set(3, qam_alphabet(4))
    assert s.size == 12
    assert s.bits_per_use == 3
    all_bits = np.array(list(itertools.product([0, 1], repeat=3)))
    idx = map_bits(all_bits, s)
    assert set(s.antenna[idx].tolist()) == {0, 1}


@given(st.data())
def test_bit_errors_is_hamming_distance(data):
    s = build_sm_signal_set(4, qam_alphabet(4))
    a = np.array(data.draw(st.lists(st.integers(0, 15), min_size=5, max_size=5)))
    b = np.array(data.draw(st.lists(st.integers(0, 15), min_size=5, max_size=5)))
    expected = sum(bin(int(u) ^ int(v)).count("1") for u, v in zip(a, b))
    assert bit_errors(a, b, s) == expected
