import numpy as np
import pytest

from smmimo import (
    ConfigError,
    SystemConfig,
    build_sm_signal_set,
    channel_block,
    generate_channel,
    qam_alphabet,
    snr_to_noise_variance,
    transmit,
)


@pytest.fixture
def sm44():
    return build_sm_signal_set(4, qam_alphabet(4))


def test_channel_shape(sm44):
    cfg = SystemConfig(16, 128, sm44)
    H = generate_channel(cfg, np.random.default_rng(0))
    assert H.shape == (128, 64)
    assert cfg.loading_factor == 0.125


def test_channel_deterministic(sm44):
    cfg = SystemConfig(4, 8, sm44)
    a = generate_channel(cfg, np.random.default_rng(7))
    b = generate_channel(cfg, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_channel_unit_variance(sm44):
    cfg = SystemConfig(16, 128, sm44)
    rng = np.random.default_rng(1)
    H = np.concatenate([generate_channel(cfg, rng).ravel() for _ in range(130)])
    assert H.size >= 10**6
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.mean(H.real**2) == pytest.approx(0.5, abs=0.01)


def test_channel_per_user_variance(sm44):
    prof = np.array([0.25, 0.75, 1.0, 2.0])
    cfg = SystemConfig(4, 64, sm44, prof)
    rng = np.random.default_rng(2)
    H = np.stack([generate_channel(cfg, rng) for _ in range(400)])
    per_user = (np.abs(H) ** 2).reshape(400, 64, 4, 4).mean(axis=(0, 1, 3))
    np.testing.assert_allclose(per_user, prof, rtol=0.03)


def test_power_profile_must_sum_to_k(sm44):
    with pytest.raises(ConfigError, match="sum"):
        SystemConfig(2, 8, sm44, [1.0, 1.5])


def test_zero_users_rejected(sm44):
    with pytest.raises(ConfigError):
        SystemConfig(0, 8, sm44)


def test_block_accessor(sm44):
    cfg = SystemConfig(3, 5, sm44)
    H = generate_channel(cfg, np.random.default_rng(0))
    np.testing.assert_array_equal(channel_block(H, 2, 1, 4), H[2, 4:8])


def test_noiseless_transmit_matches_dense(sm44):
    rng = np.random.default_rng(3)
    cfg = SystemConfig(6, 10, sm44)
    for _ in range(20):
        H = generate_channel(cfg, rng)
        x = rng.integers(0, sm44.size, 6)
        y = transmit(x, H, sm44, 0.0).values
        np.testing.assert_allclose(y, H @ sm44.densify(x), atol=1e-12)
        # scalar per-antenna form
        for i in range(10):
            yi = sum(
                sm44.values[x[k]] * H[i, k * 4 + sm44.antenna[x[k]]] for k in range(6)
            )
            assert abs(y[i] - yi) < 1e-12


def test_noise_variance_statistics(sm44):
    rng = np.random.default_rng(4)
    cfg = SystemConfig(2, 4, sm44)
    H = generate_channel(cfg, rng)
    x = np.array([3, 9])
    clean = H @ sm44.densify(x)
    n = np.concatenate(
        [transmit(x, H, sm44, 2.5, rng).values - clean for _ in range(25_000)]
    )
    assert n.size >= 10**5
    assert np.mean(np.abs(n) ** 2) == pytest.approx(2.5, rel=0.02)


def test_transmit_dimension_mismatch(sm44):
    H = np.zeros((4, 12), complex)
    with pytest.raises(ValueError):
        transmit(np.array([0, 1]), H, sm44, 0.0)


def test_snr_convention():
    cfg = SystemConfig(16, 128, build_sm_signal_set(4, qam_alphabet(4)))
    assert snr_to_noise_variance(0.0, cfg) == pytest.approx(32.0)
    assert snr_to_noise_variance(300.0, cfg) < 1e-28
    cfg16 = SystemConfig(16, 128, build_sm_signal_set(1, qam_alphabet(16)))
    assert snr_to_noise_variance(7.0, cfg16) == pytest.approx(
        5 * snr_to_noise_variance(7.0, cfg)
    )


def test_received_energy_matches_convention(sm44):
    cfg = SystemConfig(8, 32, sm44)
    rng = np.random.default_rng(5)
    acc = 0.0
    trials = 4000
    for _ in range(trials):
        H = generate_channel(cfg, rng)
        x = rng.integers(0, sm44.size, 8)
        acc += np.sum(np.abs(H @ sm44.densify(x)) ** 2) / cfg.N
    es = sm44.alphabet.average_energy
    assert acc / trials == pytest.approx(cfg.K * es, rel=0.02)
