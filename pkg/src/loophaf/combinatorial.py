"""Brute-force hafnians and loop hafnians by enumerating matchings.

Indices are 0-based. A partition is a tuple of blocks; each block is either a
singleton ``(i,)`` or a pair ``(i, j)`` with ``i < j``.

Sums are exactly rounded (``math.fsum`` on real and imaginary parts), so the
result does not depend on enumeration order or on how the work is split
between worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from itertools import chain

import numpy as np

from .errors import CapExceededError, DimensionMismatchError, OddDimensionError
from .matrix import as_square, as_vector

__all__ = [
    "DEFAULT_ENUM_CAP",
    "Partition",
    "enumerate_spm",
    "enumerate_pmp",
    "involution_number",
    "double_factorial",
    "haf_bruteforce",
    "lhaf_bruteforce",
    "lhaf_diagonal",
]

DEFAULT_ENUM_CAP = 20

Partition = tuple[tuple[int, ...], ...]


def involution_number(n: int) -> int:
    a, b = 1, 1
    for k in range(2, n + 1):
        a, b = b, b + (k - 1) * a
    return b if n >= 1 else 1


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


def _spm(rest: tuple[int, ...], singletons: bool):
    if not rest:
        yield ()
        return
    i, tail = rest[0], rest[1:]
    if singletons:
        for p in _spm(tail, singletons):
            yield ((i,),) + p
    for k, j in enumerate(tail):
        for p in _spm(tail[:k] + tail[k + 1:], singletons):
            yield ((i, j),) + p


class _PartitionStream:
    """Restartable iterable over partitions; ``len`` gives the count without enumerating."""

    def __init__(self, n: int, singletons: bool):
        self.n = n
        self.singletons = singletons

    def __iter__(self):
        return _spm(tuple(range(self.n)), self.singletons)

    def __len__(self):
        if self.singletons:
            return involution_number(self.n)
        return double_factorial(self.n - 1)


def enumerate_spm(mu: int) -> _PartitionStream:
    """All partitions of ``range(mu)`` into pairs and singletons.

    Order: recurse on the smallest unassigned index, singleton branch first,
    then pairs with partners in increasing order.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return _PartitionStream(mu, singletons=True)


def enumerate_pmp(n: int) -> _PartitionStream:
    """All perfect matchings of ``range(n)``, ``n`` even."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n % 2:
        raise OddDimensionError(f"perfect matchings need an even size, got {n}")
    return _PartitionStream(n, singletons=False)


def _collect(S, v, rest, prefix, out):
    # zero factors prune the whole subtree; they contribute nothing to the sum
    if not rest:
        out.append(prefix)
        return
    i, tail = rest[0], rest[1:]
    if v is not None:
        w = v[i]
        if w:
            _collect(S, v, tail, prefix * w, out)
    row = S[i]
    for k in range(len(tail)):
        w = row[tail[k]]
        if w:
            _collect(S, v, tail[:k] + tail[k + 1:], prefix * w, out)


def _exact_parts(xs: list[float]) -> list[float]:
    """Floats whose exact sum equals the exact sum of ``xs``."""
    parts: list[float] = []
    while True:
        s = math.fsum(chain(xs, (-p for p in parts)))
        if s == 0.0:
            return parts
        parts.append(s)


def _branch_parts(S, v, branch):
    """Exact real/imaginary parts of one top-level branch.

    ``branch`` is ``None`` for the leading singleton, else the leading index's partner.
    """
    n = len(S)
    tail = tuple(range(1, n))
    out: list[complex] = []
    if branch is None:
        w = v[0]
        if w:
            _collect(S, v, tail, (1 + 0j) * w, out)
    else:
        w = S[0][branch]
        if w:
            _collect(S, v, tuple(j for j in tail if j != branch), (1 + 0j) * w, out)
    return _exact_parts([t.real for t in out]), _exact_parts([t.imag for t in out])


def _matching_sum(S: np.ndarray, v: np.ndarray | None, threads: int) -> complex:
    n = S.shape[0]
    if n == 0:
        return 1 + 0j
    rows = S.tolist()
    vec = None if v is None else v.tolist()
    branches = ([None] if vec is not None else []) + list(range(1, n))
    if threads > 1 and len(branches) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_branch_parts, [rows] * len(branches),
                                    [vec] * len(branches), branches))
    else:
        results = [_branch_parts(rows, vec, b) for b in branches]
    re = math.fsum(chain.from_iterable(r for r, _ in results))
    im = math.fsum(chain.from_iterable(i for _, i in results))
    return complex(re, im)


def _check_cap(dim: int, cap: int):
    if dim > cap:
        raise CapExceededError(f"dimension {dim} exceeds the enumeration cap {cap}")


def haf_bruteforce(S, *, cap: int = DEFAULT_ENUM_CAP, threads: int = 1) -> complex:
    """Hafnian as a sum over all perfect matchings. Uses the upper triangle of ``S``."""
    S = as_square(S)
    if S.shape[0] % 2:
        raise OddDimensionError(f"hafnian needs an even dimension, got {S.shape[0]}")
    _check_cap(S.shape[0], cap)
    return _matching_sum(S, None, threads)


def lhaf_bruteforce(S, v, *, cap: int = DEFAULT_ENUM_CAP, threads: int = 1) -> complex:
    """Loop hafnian: pairs weigh ``S[i, j]``, singletons weigh ``v[i]``.

    A zero ``v`` gives bit-for-bit the same value as :func:`haf_bruteforce`.
    """
    S = as_square(S)
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != S.shape[0]:
        raise DimensionMismatchError(
            f"matrix is {S.shape[0]}x{S.shape[0]} but loop vector has length {v.shape[0]}")
    v = as_vector(v)
    _check_cap(S.shape[0], cap)
    return _matching_sum(S, v, threads)


def lhaf_diagonal(S, *, cap: int = DEFAULT_ENUM_CAP, threads: int = 1) -> complex:
    """Loop hafnian with the diagonal of ``S`` as singleton weights."""
    S = as_square(S)
    return lhaf_bruteforce(S, np.diag(S), cap=cap, threads=threads)
