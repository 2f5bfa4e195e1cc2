"""
Bit levels of an exponential variable
=====================================

An Exp(lam) sample splits into independent Bernoulli bits, one per power of two.
"""

import numpy as np

from expansion_coding import LevelRange, expand_many, level_params, mgf_partial_product

# per-level probabilities: near 1/2 for fine levels, vanishing for coarse ones
r = LevelRange(8, 4)
profile = level_params(1.0, r)
for level, p in zip(profile.levels, profile.p):
    print(f"level {level:+3d}  p = {p:.6f}")

# expanding real samples recovers those frequencies
rng = np.random.default_rng(0)
x = rng.exponential(1.0, 200_000)
planes = expand_many(x, r)
print("max |bit frequency - p_l| =", np.abs(planes.bits.mean(axis=0) - profile.p).max())

# the product of per-level MGFs converges to lam / (lam - t) = 2 at t = 1/2
for w in (2, 5, 10, 20, 40):
    print(f"window +-{w:2d}: {mgf_partial_product(1.0, 0.5, LevelRange(w, w)):.12f}")
