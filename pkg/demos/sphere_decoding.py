"""
Exact ML for conventional massive MIMO
======================================

The sphere decoder returns the ML vector; the brute-force search checks it
on a small system.  Node counts show how the search effort falls with SNR.
"""

import numpy as np

from smmimo import SystemConfig, build_sm_signal_set, generate_channel, qam_alphabet, snr_to_noise_variance, transmit
from smmimo.detect import ml_brute_force, sphere_decode

rng = np.random.default_rng(7)
sset = build_sm_signal_set(1, qam_alphabet(16))

small = SystemConfig(4, 8, sset)
agree = 0
for _ in range(100):
    H = generate_channel(small, rng)
    x = rng.integers(0, 16, 4)
    y = transmit(x, H, sset, snr_to_noise_variance(6.0, small), rng).values
    agree += np.array_equal(sphere_decode(y, H, sset.alphabet).x_hat, ml_brute_force(y, H, sset).x_hat)
print(f"sphere decoder == brute force on {agree}/100 instances")

big = SystemConfig(16, 128, sset)
for snr in (4, 8, 12):
    nodes = []
    for _ in range(20):
        H = generate_channel(big, rng)
        x = rng.integers(0, 16, 16)
        y = transmit(x, H, sset, snr_to_noise_variance(snr, big), rng).values
        nodes.append(sphere_decode(y, H, sset.alphabet).flags["nodes"])
    print(f"K=16, N=128, 16-QAM at {snr:2d} dB: mean nodes visited {np.mean(nodes):.0f}")
