"""
Constellations and spatial-modulation signal sets
=================================================

Build the QAM alphabets, form the per-user SM set and map bits to it.
"""

import numpy as np

from smmimo import bit_errors, build_sm_signal_set, demap, map_bits, qam_alphabet

# Unnormalized Gray QAM on the odd-integer grid; the energy is carried explicitly.
for order in (2, 4, 8, 16, 64):
    a = qam_alphabet(order)
    print(f"{a.name:7s} bits={a.bits_per_symbol} E_s={a.average_energy:g}")

# One active antenna out of n_t = 4, each carrying a 4-QAM symbol: 16 members.
sset = build_sm_signal_set(4, qam_alphabet(4))
print("\n|S| =", sset.size, " bits per channel use =", sset.bits_per_use)
print(sset.vectors()[:6])

# The first two bits pick the antenna, the rest are the Gray label.
bits = np.array([[1, 0, 0, 1], [0, 0, 1, 1]])
idx = map_bits(bits, sset)
for b, i in zip(bits, idx):
    ant, sym = sset.split(i)
    print(b, "-> antenna", ant, "symbol", sset.alphabet.points[sym])
assert np.array_equal(demap(idx, sset), bits)

# Hamming distance between decisions is what the BER counts.
print("bit errors between the two:", bit_errors(idx[:1], idx[1:], sset))
