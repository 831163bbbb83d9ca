"""Hafnians and loop hafnians by listing matchings.

Run with ``python3 demos/01_matchings_and_hafnians.py``.
"""

import numpy as np

from loophaf import enumerate_pmp, enumerate_spm, haf_bruteforce, lhaf_bruteforce, lhaf_diagonal

# Perfect matchings of four vertices: there are 3!! = 3 of them.
for matching in enumerate_pmp(4):
    print("pmp", matching)

# Letting vertices stay single gives the involutions; I(4) = 10.
print("spm(4) has", len(enumerate_spm(4)), "partitions")

# Each perfect matching picks one product of entries.
S = np.zeros((4, 4))
for (i, j), w in {(0, 1): 1, (2, 3): 1, (0, 2): 2, (1, 3): 2, (0, 3): 3, (1, 2): 3}.items():
    S[i, j] = S[j, i] = w
print("haf =", haf_bruteforce(S).real)  # 1*1 + 2*2 + 3*3 = 14

# The loop hafnian weighs singletons by a loop vector.
print("lhaf =", lhaf_bruteforce([[2, 3], [3, 5]], [7, 11]).real)  # 7*11 + 3 = 80
print("lhaf with diag loops =", lhaf_diagonal([[2, 3], [3, 5]]).real)  # 2*5 + 3 = 13

# A zero loop vector switches singletons off, leaving the hafnian.
rng = np.random.default_rng(0)
A = rng.normal(size=(6, 6))
A = A + A.T
print("lhaf(S, 0) == haf(S):", lhaf_bruteforce(A, np.zeros(6)) == haf_bruteforce(A))
