"""
Message-passing detection
=========================

Run the MPD detector on one K=16, N=128 instance and watch the messages
settle through the per-iteration callback.
"""

import numpy as np

from smmimo import SystemConfig, build_sm_signal_set, generate_channel, qam_alphabet, snr_to_noise_variance, transmit
from smmimo.detect import ml_cost, mmse_detect, mpd_sm_detect

rng = np.random.default_rng(3)
sset = build_sm_signal_set(4, qam_alphabet(4))
cfg = SystemConfig(16, 128, sset)
H = generate_channel(cfg, rng)
x = rng.integers(0, sset.size, cfg.K)
s2 = snr_to_noise_variance(2.0, cfg)
y = transmit(x, H, sset, s2, rng).values


def show(state):
    hard = np.argmax(state.log_post, axis=1)
    print(f"iter {state.t:2d}  max change {state.change:.2e}  "
          f"wrong users {np.count_nonzero(hard != x)}  min var/sigma^2 {state.var.min() / s2:.2f}")


res = mpd_sm_detect(y, H, s2, sset, iterations=20, damping=0.4, callback=show)
print("\niterations", res.iterations, " ops", res.ops, " clamps", res.flags["variance_clamps"])
print("ML cost: truth", round(ml_cost(y, H, sset, x), 1), " MPD", round(res.ml_cost, 1),
      " MMSE", round(mmse_detect(y, H, s2, sset).ml_cost, 1))

# Posterior confidence for the first few users.
for k in range(4):
    p = res.posteriors[k]
    print(f"user {k}: sent {x[k]:2d}  decided {res.x_hat[k]:2d}  p={p.max():.3f}")
