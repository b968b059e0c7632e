"""
Channel model and the SNR convention
====================================

``sigma^2 = K E_s / SNR`` makes the SNR the average received signal power
per BS antenna.  A quick Monte Carlo confirms the received energy.
"""

import numpy as np

from smmimo import SystemConfig, build_sm_signal_set, generate_channel, qam_alphabet, snr_to_noise_variance, transmit

rng = np.random.default_rng(0)
sset = build_sm_signal_set(4, qam_alphabet(4))
cfg = SystemConfig(K=16, N=128, sm_set=sset)
print("alpha =", cfg.loading_factor, " columns =", cfg.num_columns)

s2 = snr_to_noise_variance(0.0, cfg)
print("sigma^2 at 0 dB:", s2)   # 16 users x E_s = 2

energy = []
noise = []
for _ in range(200):
    H = generate_channel(cfg, rng)
    x = rng.integers(0, sset.size, cfg.K)
    clean = transmit(x, H, sset, 0.0).values
    noisy = transmit(x, H, sset, s2, rng).values
    energy.append(np.mean(np.abs(clean) ** 2))
    noise.append(np.mean(np.abs(noisy - clean) ** 2))
print(f"E|Hx|^2 per antenna {np.mean(energy):.2f} (expect {cfg.K * 2})")
print(f"noise power {np.mean(noise):.2f} (expect {s2})")

# A per-user power profile must sum to K.
prof = np.r_[np.full(8, 1.5), np.full(8, 0.5)]
H = generate_channel(SystemConfig(16, 128, sset, prof), rng)
print("column power, strong vs weak users:",
      np.mean(np.abs(H[:, :32]) ** 2).round(2), np.mean(np.abs(H[:, 32:]) ** 2).round(2))
