"""Joint moments of a real multivariate Gaussian via (loop) hafnians.

``E[prod_j X_j**q_j]`` is the loop hafnian of the covariance extended by the
powers ``q``, with the extended mean as loop vector. Central moments drop the
loop vector and reduce to hafnians. :func:`mc_moment_estimate` is a sampling
estimate kept deliberately independent of the hafnian code.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .combinatorial import DEFAULT_ENUM_CAP, lhaf_bruteforce
from .errors import CapExceededError, LengthMismatchError, NotPositiveSemidefiniteError
from .genfun import DEFAULT_DEGREE_CAP, lemma_lhaf
from .matrix import as_counts, extend_matrix, extend_vector, validate_symmetric

__all__ = [
    "PSD_TOL",
    "GaussianSpec",
    "gaussian_moment",
    "central_moment",
    "mc_moment_estimate",
]

PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Real Gaussian with ``covariance`` and ``mean``.

    Eigenvalues of the covariance down to ``-PSD_TOL * ||K||`` are accepted as
    rounding noise and clipped to zero; anything more negative is rejected.
    """

    covariance: np.ndarray
    mean: np.ndarray | None = None

    def __post_init__(self):
        K = np.asarray(self.covariance)
        if np.iscomplexobj(K) and np.any(K.imag != 0):
            raise ValueError("covariance must be real")
        K = K.real.astype(float)
        scale = float(np.max(np.abs(K))) if K.size else 0.0
        K = validate_symmetric(K, tol=1e-12 * max(scale, 1.0)).real
        mean = np.zeros(K.shape[0]) if self.mean is None else np.asarray(self.mean)
        if np.iscomplexobj(mean) and np.any(mean.imag != 0):
            raise ValueError("mean must be real")
        mean = mean.real.astype(float).reshape(-1)
        if mean.shape[0] != K.shape[0]:
            raise LengthMismatchError(f"mean has length {mean.shape[0]}, covariance is {K.shape[0]}")

        lam, vecs = np.linalg.eigh(K)
        norm = np.linalg.norm(K, 2) if K.size else 0.0
        if lam.size and lam[0] < -PSD_TOL * norm:
            raise NotPositiveSemidefiniteError(
                f"covariance has eigenvalue {lam[0]:.3e} below -{PSD_TOL:g} * ||K||")
        if lam.size and lam[0] < 0:
            K = (vecs * np.clip(lam, 0, None)) @ vecs.T
            K = (K + K.T) / 2
        K.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "covariance", K)
        object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    def centered(self) -> GaussianSpec:
        return GaussianSpec(self.covariance, np.zeros(self.dim))

    def scaled(self, c: float) -> GaussianSpec:
        """Distribution of ``c * X``."""
        return GaussianSpec(c * c * self.covariance, c * self.mean)

    def factor(self) -> np.ndarray:
        """A matrix ``L`` with ``L @ L.T == covariance``."""
        try:
            return np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError:
            lam, vecs = np.linalg.eigh(self.covariance)
            return vecs * np.sqrt(np.clip(lam, 0, None))


def _powers(spec: GaussianSpec, powers) -> tuple[int, ...]:
    q = as_counts(powers, spec.dim)
    if sum(q) < 1:
        raise ValueError("a moment query needs at least one variable")
    return q


def gaussian_moment(spec: GaussianSpec, powers, *, route: str = "auto",
                    cap: int = DEFAULT_ENUM_CAP, degree_cap: int = DEFAULT_DEGREE_CAP) -> float:
    """Non-central moment ``E[prod_j X_j**powers[j]]``.

    ``route`` is ``"bruteforce"`` (matching enumeration on the extended pair),
    ``"lemma"`` (series coefficient) or ``"auto"``, which enumerates while the
    total power fits under ``cap`` and switches to the series otherwise.
    """
    q = _powers(spec, powers)
    total = sum(q)
    if route == "auto":
        route = "bruteforce" if total <= cap else "lemma"
    if route == "bruteforce":
        val = lhaf_bruteforce(extend_matrix(spec.covariance, q), extend_vector(spec.mean, q), cap=cap)
    elif route == "lemma":
        if total > degree_cap:
            raise CapExceededError(f"total power {total} exceeds the series degree cap {degree_cap}")
        val = lemma_lhaf(spec.covariance, spec.mean, q, degree_cap=degree_cap)
    else:
        raise ValueError(f"unknown route {route!r}")
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"moment has a non-negligible imaginary part {val.imag:.3e}")
    return float(val.real)


def central_moment(spec: GaussianSpec, powers, **kwargs) -> float:
    """``E[prod_j (X_j - mean_j)**powers[j]]``; zero whenever the total power is odd."""
    q = _powers(spec, powers)
    if sum(q) % 2:
        return 0.0
    return gaussian_moment(spec.centered(), q, **kwargs)


def _block_stats(spec, L, q, n, seed_seq):
    rng = np.random.default_rng(seed_seq)
    x = spec.mean + rng.standard_normal((n, spec.dim)) @ L.T
    vals = np.prod(x ** np.asarray(q), axis=1)
    mu = vals.mean()
    return n, mu, float(np.sum((vals - mu) ** 2))


def mc_moment_estimate(spec: GaussianSpec, powers, samples: int, seed: int, *,
                       block_size: int = 100_000, threads: int = 1) -> tuple[float, float]:
    """Monte-Carlo estimate of :func:`gaussian_moment` and its standard error.

    Samples are drawn in blocks, each with its own child of
    ``SeedSequence(seed)``, and block statistics are merged in block order, so
    the result depends on ``seed``, ``samples`` and ``block_size`` only.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    q = _powers(spec, powers)
    L = spec.factor()
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    args = [(spec, L, q, n, s) for n, s in zip(sizes, seeds)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(lambda a: _block_stats(*a), args))
    else:
        stats = [_block_stats(*a) for a in args]

    # merge (count, mean, sum of squared deviations) in block order
    n, mu, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = n + nb
        delta = mb - mu
        mu += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    var = m2 / (n - 1)
    return float(mu), float(np.sqrt(var / n))
