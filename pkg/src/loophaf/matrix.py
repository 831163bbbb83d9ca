"""Symmetric-matrix plumbing: ingest validation, block extensions and odd-to-even embedding.

Matrices are plain ``complex128`` numpy arrays, multi-indices are tuples of
non-negative ints. Every function here returns a fresh array and never
mutates its inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AsymmetryError,
    EvenDimensionError,
    LengthMismatchError,
    NonFiniteError,
    NonSquareError,
    OddDimensionError,
)

__all__ = [
    "validate_symmetric",
    "as_square",
    "as_vector",
    "as_counts",
    "extend_matrix",
    "extend_vector",
    "paired_extension",
    "embed_odd",
    "random_symmetric",
    "random_loop_vector",
    "random_singular_symmetric",
    "random_repeated_eigenvalue_symmetric",
]


def as_square(raw) -> np.ndarray:
    a = np.asarray(raw, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    return a


def as_vector(raw, dim: int | None = None) -> np.ndarray:
    v = np.asarray(raw, dtype=np.complex128).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise LengthMismatchError(f"loop vector has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("loop vector contains NaN or infinite entries")
    return v


def as_counts(counts, length: int | None = None) -> tuple[int, ...]:
    out = tuple(int(c) for c in counts)
    if any(c < 0 for c in out):
        raise ValueError(f"counts must be non-negative, got {out}")
    if length is not None and len(out) != length:
        raise LengthMismatchError(f"counts has length {len(out)}, expected {length}")
    return out


def validate_symmetric(raw, tol: float = 0.0) -> np.ndarray:
    """Return the midpoint symmetrization of ``raw``.

    Raises :class:`AsymmetryError` naming the worst offending index pair when
    ``|raw[i, j] - raw[j, i]|`` exceeds ``tol`` anywhere.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = as_square(raw)
    dev = np.abs(a - a.T)
    if a.size and dev.max() > tol:
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        i, j = sorted((int(i), int(j)))
        raise AsymmetryError(i, j, float(dev[i, j]), tol)
    return (a + a.T) / 2


def extend_matrix(S, counts) -> np.ndarray:
    """Replace each entry ``S[i, j]`` by a constant ``counts[i] x counts[j]`` block.

    Rows and columns with a zero count disappear; all-zero counts give a 0x0 matrix.
    """
    S = as_square(S)
    counts = as_counts(counts, S.shape[0])
    return np.repeat(np.repeat(S, counts, axis=0), counts, axis=1)


def extend_vector(v, counts) -> np.ndarray:
    v = as_vector(v)
    counts = as_counts(counts, v.shape[0])
    return np.repeat(v, counts)


def paired_extension(S, v, counts):
    """Extend a ``2m x 2m`` pair where indices ``j`` and ``j + m`` share ``counts[j]``."""
    S = as_square(S)
    dim = S.shape[0]
    if dim % 2:
        raise OddDimensionError(f"paired extension needs an even dimension, got {dim}")
    v = as_vector(v, dim)
    counts = as_counts(counts, dim // 2)
    doubled = counts + counts
    return extend_matrix(S, doubled), extend_vector(v, doubled)


def embed_odd(S, v):
    """Embed an odd-dimensional pair into one dimension higher without changing its loop hafnian.

    The new leading index has diagonal entry 1, zero coupling to every other
    index, and loop weight 1.
    """
    S = as_square(S)
    dim = S.shape[0]
    if dim % 2 == 0:
        raise EvenDimensionError(f"embed_odd needs an odd dimension, got {dim}")
    v = as_vector(v, dim)
    out = np.zeros((dim + 1, dim + 1), dtype=np.complex128)
    out[0, 0] = 1
    out[1:, 1:] = S
    return out, np.concatenate([[1.0 + 0j], v])


# Test-instance distributions. Real and imaginary parts are uniform on
# [-scale, scale] before symmetrization.


def random_symmetric(dim: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    a = rng.uniform(-scale, scale, (dim, dim)) + 1j * rng.uniform(-scale, scale, (dim, dim))
    return (a + a.T) / 2


def random_loop_vector(dim: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    return rng.uniform(-scale, scale, dim) + 1j * rng.uniform(-scale, scale, dim)


def random_singular_symmetric(dim: int, rng: np.random.Generator, rank: int = 1,
                              scale: float = 0.5) -> np.ndarray:
    """Complex symmetric matrix ``sum_k u_k u_k^T`` of rank at most ``rank`` (< dim)."""
    u = random_loop_vector(dim * rank, rng, scale).reshape(rank, dim)
    return np.einsum("ki,kj->ij", u, u)


def random_repeated_eigenvalue_symmetric(dim: int, rng: np.random.Generator,
                                         scale: float = 0.5) -> np.ndarray:
    """``Q diag(lam, lam, mu, ...) Q^T`` with a real orthogonal ``Q``.

    The first two eigenvalues coincide, so the spectrum is degenerate.
    """
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    lam = random_loop_vector(dim, rng, scale)
    lam[1] = lam[0]
    return (q * lam) @ q.T
