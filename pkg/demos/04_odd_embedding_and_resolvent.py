"""Odd dimensions, and the resolvent identity behind the exponent."""

import numpy as np

from loophaf import embed_odd, eq13_identity_check, lhaf_bruteforce
from loophaf.matrix import random_loop_vector, random_symmetric

rng = np.random.default_rng(4)
S = random_symmetric(5, rng)
v = random_loop_vector(5, rng)
S6, v6 = embed_odd(S, v)
print(S6.shape, "same loop hafnian:", lhaf_bruteforce(S6, v6) == lhaf_bruteforce(S, v))

# S^-1 - S^-1 (S^-1 - Z)^-1 S^-1 equals -(1 - Z S)^-1 Z for small z.
T = random_symmetric(4, rng) + np.eye(4)
print("max gap:", eq13_identity_check(T, [0.1, 0.1j]))
