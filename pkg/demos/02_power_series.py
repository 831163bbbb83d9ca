"""Truncated multivariate power series.

Coefficients live in a dense array in graded order, so truncation is a slice.
"""

from math import comb

import numpy as np

from loophaf import SeriesMatrix, TruncatedSeries
from loophaf.series import det_series, monomials, series_exp, series_inv_sqrt

print("monomials in 2 variables up to degree 2:", monomials(2, 2))

x = TruncatedSeries.variable(0, 2, 4)
y = TruncatedSeries.variable(1, 2, 4)
print("(1 + x)(1 - y) =", ((1 + x) * (1 - y)).to_dict())

e = series_exp(x + y)
print("coefficient of x^2 y^2 in exp(x + y):", e.coefficient((2, 2)), "vs", 1 / 4)

# (1 - 2t)^(-1/2) = sum_k C(2k, k) t^k / 2^k
t = TruncatedSeries.variable(0, 1, 6)
print(np.round(series_inv_sqrt(1 - 2 * t).coeffs.real, 12))
print([comb(2 * k, k) / 2**k for k in range(7)])

# Determinant of a series matrix whose constant part is the identity.
M = SeriesMatrix.from_entries([[1 + x, y], [y, 1 - x]])
print("det =", det_series(M).to_dict())  # 1 - x^2 - y^2
