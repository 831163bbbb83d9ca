"""Every paired-extension loop hafnian at once, from one series.

The batch reads all loop hafnians with sum(n) <= order off a single
expansion. ``verify_master_theorem`` checks each against the lemma and brute
force.
"""

import numpy as np

from loophaf import lemma_lhaf, lhaf_batch, lhaf_bruteforce, paired_extension, verify_master_theorem
from loophaf.matrix import random_loop_vector, random_symmetric

rng = np.random.default_rng(3)
S = random_symmetric(4, rng)
v = random_loop_vector(4, rng)

batch = lhaf_batch(S, v, 3)
for n, value in batch.values.items():
    print(n, np.round(value, 10))

# Compare one entry against direct enumeration on the extended pair.
n = (2, 1)
direct = lhaf_bruteforce(*paired_extension(S, v, n))
print("batch", batch[n], "direct", direct, "lemma", lemma_lhaf(S, v, n + n))

report = verify_master_theorem(S, v, 4)
print("records:", len(report.records), "max deviation:", report.max_deviation, "passed:", report.passed)

# A singular matrix goes through the same code path.
u = random_loop_vector(4, rng)
print("rank-one S passes:", verify_master_theorem(np.outer(u, u), v, 4).passed)
