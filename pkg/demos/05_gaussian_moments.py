"""Gaussian moments as loop hafnians, checked by sampling."""

import numpy as np

from loophaf import GaussianSpec, central_moment, gaussian_moment, mc_moment_estimate

std = GaussianSpec([[1.0]])
print("E[X^2] =", gaussian_moment(std, (2,)), " E[X^4] =", gaussian_moment(std, (4,)))

rho = 0.4
spec = GaussianSpec([[1.0, rho], [rho, 2.0]], mean=[0.3, -0.5])
print("central E[X1 X2] =", central_moment(spec, (1, 1)))
print("central E[X1^2 X2^2] =", central_moment(spec, (2, 2)), "=", 2 + 2 * rho**2)

exact = gaussian_moment(spec, (2, 3))
est, err = mc_moment_estimate(spec, (2, 3), 1_000_000, seed=1)
print(f"E[X1^2 X2^3] = {exact:.5f}, sampled {est:.5f} +/- {err:.5f}")

# High powers switch to the series route automatically.
print("E[X^24] =", gaussian_moment(std, (24,)), "=", float(np.prod(np.arange(23, 0, -2))))
