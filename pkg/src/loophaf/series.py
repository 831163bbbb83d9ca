"""Truncated multivariate power series with complex coefficients.

A :class:`TruncatedSeries` in ``nvars`` variables keeps every monomial of total
degree ``<= order``. Coefficients live in a dense 1-D array indexed by the
graded-lexicographic rank of the exponent: monomials are sorted by total
degree, then by exponent tuple. Because the order is graded, the basis for a
lower order is a prefix of the basis for a higher one, so truncation is a
slice.

Float mode stores ``complex128``. Exact mode stores Python objects (ints,
:class:`fractions.Fraction`, sympy Gaussian rationals, ...) and falls back to
plain loops; it exists for checking ring identities without rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import (
    CapExceededError,
    ConstantTermNotOneError,
    DegreeOutOfRangeError,
    NonUnitConstantTermError,
    NonzeroConstantTermError,
    SeriesShapeMismatchError,
)

__all__ = [
    "TruncatedSeries",
    "SeriesMatrix",
    "monomials",
    "series_add",
    "series_scale",
    "series_mul",
    "series_exp",
    "series_inv_sqrt",
    "series_inverse",
    "det_series",
    "neumann_inverse_times",
    "coefficient",
]

MAX_PAIRS = 20_000_000


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomials(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of total degree ``<= order`` in graded-lexicographic order."""
    return tuple(e for d in range(order + 1) for e in _compositions(d, nvars))


class _Basis:
    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.exps = monomials(nvars, order)
        self.size = len(self.exps)
        self.rank = {e: r for r, e in enumerate(self.exps)}
        self.exp_array = np.array(self.exps, dtype=np.int64).reshape(self.size, nvars)
        self.degrees = self.exp_array.sum(axis=1)
        # prefix[d] = number of monomials of degree <= d
        self.prefix = np.searchsorted(self.degrees, np.arange(order + 1), side="right")
        self._pairs = None

    @property
    def pairs(self):
        """``(left, right, target, scatter)`` for products surviving truncation.

        Product ``p`` multiplies monomials ``left[p]`` and ``right[p]`` and lands
        on rank ``target[p]``; ``scatter`` is the matching sparse 0/1 matrix of
        shape ``size x npairs``.
        """
        if self._pairs is None:
            npairs = int(sum(self.prefix[self.order - d] for d in self.degrees))
            if npairs > MAX_PAIRS:
                raise CapExceededError(
                    f"{self.nvars} variables at order {self.order} need {npairs} products")
            left = np.repeat(np.arange(self.size), self.prefix[self.order - self.degrees])
            right = np.concatenate([np.arange(self.prefix[self.order - d]) for d in self.degrees])
            base = self.order + 1
            weights = base ** np.arange(self.nvars, dtype=np.int64)
            codes = self.exp_array @ weights
            order_idx = np.argsort(codes)
            target_codes = codes[left] + codes[right]
            target = order_idx[np.searchsorted(codes[order_idx], target_codes)]
            scatter = sp.csr_matrix(
                (np.ones(npairs), (target, np.arange(npairs))), shape=(self.size, npairs))
            self._pairs = (left, right, target, scatter)
        return self._pairs


@lru_cache(maxsize=64)
def _basis(nvars: int, order: int) -> _Basis:
    return _Basis(nvars, order)


def _is_zero(x) -> bool:
    return not x


def _is_one(x) -> bool:
    return not (x - 1)


def _mul_arrays(a: np.ndarray, b: np.ndarray, basis: _Basis) -> np.ndarray:
    """Truncated product of coefficient arrays; trailing axis is the monomial axis."""
    left, right, target, scatter = basis.pairs
    if a.dtype == object or b.dtype == object:
        out = np.empty(a.shape[:-1] + (basis.size,), dtype=object)
        out[...] = 0
        flat_a = a.reshape(-1, basis.size)
        flat_b = b.reshape(-1, basis.size)
        flat_o = out.reshape(-1, basis.size)
        for row in range(flat_o.shape[0]):
            ar, br, orow = flat_a[row], flat_b[row], flat_o[row]
            for l, r, t in zip(left, right, target):
                x, y = ar[l], br[r]
                if not _is_zero(x) and not _is_zero(y):
                    orow[t] = orow[t] + x * y
        return out
    prod = a[..., left] * b[..., right]
    lead = prod.shape[:-1]
    flat = prod.reshape(-1, prod.shape[-1])
    return np.asarray((scatter @ flat.T).T).reshape(lead + (basis.size,))


def _ring_constant(c: Fraction, exact: bool):
    return c if exact else complex(c)


class TruncatedSeries:
    """Immutable truncated power series; see the module docstring for the layout."""

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs):
        if nvars < 1 or order < 0:
            raise ValueError(f"need nvars >= 1 and order >= 0, got {nvars}, {order}")
        coeffs = np.asarray(coeffs)
        if coeffs.dtype != object:
            coeffs = coeffs.astype(np.complex128)
        size = _basis(nvars, order).size
        if coeffs.shape != (size,):
            raise SeriesShapeMismatchError(
                f"expected {size} coefficients for {nvars} vars at order {order}, got {coeffs.shape}")
        coeffs.flags.writeable = False
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    # construction

    @classmethod
    def zero(cls, nvars: int, order: int, exact: bool = False) -> TruncatedSeries:
        size = _basis(nvars, order).size
        if exact:
            c = np.empty(size, dtype=object)
            c[:] = 0
        else:
            c = np.zeros(size, dtype=np.complex128)
        return cls(nvars, order, c)

    @classmethod
    def constant(cls, value, nvars: int, order: int, exact: bool = False) -> TruncatedSeries:
        c = cls.zero(nvars, order, exact).coeffs.copy()
        c[0] = value
        return cls(nvars, order, c)

    @classmethod
    def one(cls, nvars: int, order: int, exact: bool = False) -> TruncatedSeries:
        return cls.constant(1, nvars, order, exact)

    @classmethod
    def variable(cls, k: int, nvars: int, order: int, exact: bool = False) -> TruncatedSeries:
        return cls.from_dict({tuple(int(i == k) for i in range(nvars)): 1}, nvars, order, exact)

    @classmethod
    def from_dict(cls, terms: dict, nvars: int, order: int, exact: bool = False) -> TruncatedSeries:
        """Build from ``{exponent: coefficient}``; terms above ``order`` are dropped."""
        basis = _basis(nvars, order)
        c = cls.zero(nvars, order, exact).coeffs.copy()
        for e, val in terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars:
                raise SeriesShapeMismatchError(f"exponent {e} does not have {nvars} entries")
            if sum(e) <= order:
                c[basis.rank[e]] = c[basis.rank[e]] + val
        return cls(nvars, order, c)

    # inspection

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def exponents(self) -> tuple[tuple[int, ...], ...]:
        return _basis(self.nvars, self.order).exps

    @property
    def constant_term(self):
        return self.coeffs[0]

    def coefficient(self, k):
        return coefficient(self, k)

    def to_dict(self) -> dict:
        """Nonzero coefficients keyed by exponent tuple."""
        return {e: c for e, c in zip(self.exponents, self.coeffs) if not _is_zero(c)}

    def min_degree(self) -> int | None:
        """Lowest total degree with a nonzero coefficient, ``None`` for the zero series."""
        basis = _basis(self.nvars, self.order)
        for r, c in enumerate(self.coeffs):
            if not _is_zero(c):
                return int(basis.degrees[r])
        return None

    def truncate(self, order: int) -> TruncatedSeries:
        if order > self.order:
            raise DegreeOutOfRangeError(f"cannot raise order {self.order} to {order}")
        return TruncatedSeries(self.nvars, order, self.coeffs[: _basis(self.nvars, order).size])

    def with_order(self, order: int) -> TruncatedSeries:
        """Truncate, or pad with zero coefficients when ``order`` is higher."""
        if order <= self.order:
            return self.truncate(order)
        c = TruncatedSeries.zero(self.nvars, order, self.exact).coeffs.copy()
        c[: self.coeffs.shape[0]] = self.coeffs
        return TruncatedSeries(self.nvars, order, c)

    def evaluate(self, z) -> complex:
        """Value of the truncated polynomial at a numeric point."""
        z = np.asarray(z, dtype=np.complex128).reshape(self.nvars)
        mono = np.prod(z[None, :] ** _basis(self.nvars, self.order).exp_array, axis=1)
        return complex(np.dot(self.coeffs.astype(np.complex128), mono))

    def allclose(self, other: TruncatedSeries, atol: float = 1e-12) -> bool:
        _check_same(self, other)
        return bool(np.all(np.abs(self.coeffs.astype(complex) - other.coeffs.astype(complex)) <= atol))

    # arithmetic

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_add(self, other)
        c = self.coeffs.copy()
        c[0] = c[0] + other
        return TruncatedSeries(self.nvars, self.order, c)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.nvars, self.order, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return series_scale(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        terms = self.to_dict()
        body = " + ".join(f"({c})*{e}" for e, c in list(terms.items())[:6])
        more = " + ..." if len(terms) > 6 else ""
        return f"TruncatedSeries(nvars={self.nvars}, order={self.order}: {body or '0'}{more})"


def _check_same(a: TruncatedSeries, b: TruncatedSeries):
    if a.nvars != b.nvars or a.order != b.order:
        raise SeriesShapeMismatchError(
            f"series shapes differ: ({a.nvars} vars, order {a.order}) vs "
            f"({b.nvars} vars, order {b.order})")


def _promote(a: np.ndarray, b: np.ndarray):
    if a.dtype == object or b.dtype == object:
        return a.astype(object), b.astype(object)
    return a, b


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_same(a, b)
    x, y = _promote(a.coeffs, b.coeffs)
    return TruncatedSeries(a.nvars, a.order, x + y)


def series_scale(a: TruncatedSeries, c) -> TruncatedSeries:
    return TruncatedSeries(a.nvars, a.order, a.coeffs * c)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Product with every monomial of total degree above the order discarded."""
    _check_same(a, b)
    x, y = _promote(a.coeffs, b.coeffs)
    return TruncatedSeries(a.nvars, a.order, _mul_arrays(x, y, _basis(a.nvars, a.order)))


def coefficient(series: TruncatedSeries, k):
    k = tuple(int(x) for x in k)
    if len(k) != series.nvars:
        raise SeriesShapeMismatchError(f"multi-index {k} does not have {series.nvars} entries")
    if any(x < 0 for x in k) or sum(k) > series.order:
        raise DegreeOutOfRangeError(f"multi-index {k} is outside order {series.order}")
    return series.coeffs[_basis(series.nvars, series.order).rank[k]]


def _horner(u: TruncatedSeries, coeffs: list[Fraction]) -> TruncatedSeries:
    """``sum_k coeffs[k] * u**k`` for ``u`` with zero constant term."""
    exact = u.exact
    result = TruncatedSeries.constant(_ring_constant(coeffs[-1], exact), u.nvars, u.order, exact)
    for c in reversed(coeffs[:-1]):
        result = series_mul(u, result) + _ring_constant(c, exact)
    return result


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """``exp(a)`` truncated at ``a.order``; ``a`` must have a zero constant term."""
    if not _is_zero(a.constant_term):
        raise NonzeroConstantTermError(f"exp needs a zero constant term, got {a.constant_term}")
    return _horner(a, [Fraction(1, math.factorial(k)) for k in range(a.order + 1)])


def _binomial_half(k: int) -> Fraction:
    # binom(-1/2, k) = (-1)^k (2k-1)!! / (2^k k!)
    return Fraction((-1) ** k * math.prod(range(2 * k - 1, 0, -2)), 2 ** k * math.factorial(k))


def series_inv_sqrt(a: TruncatedSeries) -> TruncatedSeries:
    """``a ** (-1/2)`` on the branch with constant term ``+1``.

    ``a`` must have constant term exactly 1.
    """
    if not _is_one(a.constant_term):
        raise ConstantTermNotOneError(f"inverse square root needs constant term 1, got {a.constant_term}")
    u = a - 1
    return _horner(u, [_binomial_half(k) for k in range(a.order + 1)])


def series_inverse(a: TruncatedSeries) -> TruncatedSeries:
    """``1 / a`` for ``a`` with constant term exactly 1."""
    if not _is_one(a.constant_term):
        raise ConstantTermNotOneError(f"series inverse needs constant term 1, got {a.constant_term}")
    u = a - 1
    return _horner(u, [Fraction((-1) ** k) for k in range(a.order + 1)])


class SeriesMatrix:
    """Square matrix of truncated series sharing ``nvars`` and ``order``.

    ``coeffs`` has shape ``(dim, dim, n_monomials)``.
    """

    __slots__ = ("dim", "nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.dtype != object:
            coeffs = coeffs.astype(np.complex128)
        size = _basis(nvars, order).size
        if coeffs.ndim != 3 or coeffs.shape[0] != coeffs.shape[1] or coeffs.shape[2] != size:
            raise SeriesShapeMismatchError(
                f"expected shape (dim, dim, {size}), got {coeffs.shape}")
        coeffs.flags.writeable = False
        self.dim = coeffs.shape[0]
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def from_entries(cls, grid) -> SeriesMatrix:
        grid = [list(row) for row in grid]
        first = grid[0][0]
        for row in grid:
            if len(row) != len(grid):
                raise SeriesShapeMismatchError("series matrix must be square")
            for s in row:
                _check_same(first, s)
        exact = any(s.exact for row in grid for s in row)
        dtype = object if exact else np.complex128
        return cls(first.nvars, first.order,
                   np.array([[s.coeffs for s in row] for row in grid], dtype=dtype))

    @classmethod
    def constant(cls, A, nvars: int, order: int, exact: bool = False) -> SeriesMatrix:
        A = np.asarray(A, dtype=object if exact else np.complex128)
        size = _basis(nvars, order).size
        c = np.zeros(A.shape + (size,), dtype=A.dtype)
        if exact:
            c[...] = 0
        c[..., 0] = A
        return cls(nvars, order, c)

    @classmethod
    def identity(cls, dim: int, nvars: int, order: int, exact: bool = False) -> SeriesMatrix:
        eye = np.eye(dim, dtype=np.int64)
        return cls.constant(eye.astype(object) if exact else eye, nvars, order, exact)

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    def entry(self, i: int, j: int) -> TruncatedSeries:
        return TruncatedSeries(self.nvars, self.order, self.coeffs[i, j])

    def entries(self) -> list[list[TruncatedSeries]]:
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def constant_matrix(self) -> np.ndarray:
        return self.coeffs[..., 0]

    def truncate(self, order: int) -> SeriesMatrix:
        return SeriesMatrix(self.nvars, order, self.coeffs[..., : _basis(self.nvars, order).size])

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128).reshape(self.nvars)
        mono = np.prod(z[None, :] ** _basis(self.nvars, self.order).exp_array, axis=1)
        return self.coeffs.astype(np.complex128) @ mono

    def _same(self, other: SeriesMatrix):
        if (self.dim, self.nvars, self.order) != (other.dim, other.nvars, other.order):
            raise SeriesShapeMismatchError("series matrices differ in dim, nvars or order")

    def __add__(self, other: SeriesMatrix) -> SeriesMatrix:
        self._same(other)
        x, y = _promote(self.coeffs, other.coeffs)
        return SeriesMatrix(self.nvars, self.order, x + y)

    def __neg__(self) -> SeriesMatrix:
        return SeriesMatrix(self.nvars, self.order, -self.coeffs)

    def __sub__(self, other: SeriesMatrix) -> SeriesMatrix:
        return self + (-other)

    def __matmul__(self, other) -> SeriesMatrix:
        if isinstance(other, SeriesMatrix):
            self._same(other)
            x, y = _promote(self.coeffs, other.coeffs)
            basis = _basis(self.nvars, self.order)
            if x.dtype == object:
                out = np.empty_like(x)
                out[...] = 0
                for i in range(self.dim):
                    for k in range(self.dim):
                        acc = out[i, k]
                        for j in range(self.dim):
                            acc = acc + _mul_arrays(x[i, j], y[j, k], basis)
                        out[i, k] = acc
                return SeriesMatrix(self.nvars, self.order, out)
            # sum over j of entrywise series products, batched over (i, k)
            left, right, _, scatter = basis.pairs
            prod = np.einsum("ijp,jkp->ikp", x[..., left], y[..., right])
            flat = prod.reshape(-1, prod.shape[-1])
            out = np.asarray((scatter @ flat.T).T).reshape(self.dim, self.dim, basis.size)
            return SeriesMatrix(self.nvars, self.order, out)
        # numeric matrix on the right
        B = np.asarray(other, dtype=object if self.exact else np.complex128)
        return SeriesMatrix(self.nvars, self.order, np.einsum("ijp,jk->ikp", self.coeffs, B))

    def __rmatmul__(self, other) -> SeriesMatrix:
        A = np.asarray(other, dtype=object if self.exact else np.complex128)
        return SeriesMatrix(self.nvars, self.order, np.einsum("ij,jkp->ikp", A, self.coeffs))

    def quadratic_form(self, u, w=None) -> TruncatedSeries:
        """Scalar series ``u^T M w`` for numeric vectors (``w`` defaults to ``u``)."""
        w = u if w is None else w
        dtype = object if self.exact else np.complex128
        u = np.asarray(u, dtype=dtype)
        w = np.asarray(w, dtype=dtype)
        return TruncatedSeries(self.nvars, self.order, np.einsum("i,ijp,j->p", u, self.coeffs, w))


def det_series(M: SeriesMatrix) -> TruncatedSeries:
    """Determinant by elimination over the series ring.

    ``M`` must reduce to the identity at the origin; every pivot then has
    constant term 1 and is invertible in the ring.
    """
    const = M.constant_matrix()
    for i in range(M.dim):
        for j in range(M.dim):
            ok = _is_one(const[i, j]) if i == j else _is_zero(const[i, j])
            if not ok:
                raise NonUnitConstantTermError(
                    f"determinant needs M(0) = identity; entry ({i}, {j}) is {const[i, j]}")
    a = M.entries()
    det = TruncatedSeries.one(M.nvars, M.order, M.exact)
    for k in range(M.dim):
        pivot = a[k][k]
        det = det * pivot
        if k == M.dim - 1:
            break
        inv = series_inverse(pivot)
        for i in range(k + 1, M.dim):
            if a[i][k].min_degree() is None:
                continue
            f = a[i][k] * inv
            for j in range(k + 1, M.dim):
                a[i][j] = a[i][j] - f * a[k][j]
    return det


def neumann_inverse_times(M_linear: SeriesMatrix, R: SeriesMatrix) -> SeriesMatrix:
    """``(1 - M_linear)^{-1} R`` as the truncated geometric series ``sum_k M^k R``.

    Exact at the truncation order because ``M^k`` starts at total degree ``k``.
    """
    M_linear._same(R)
    const = M_linear.constant_matrix()
    if any(not _is_zero(c) for c in np.ravel(const)):
        raise NonzeroConstantTermError("Neumann series needs a zero constant term in every entry")
    X = R
    for _ in range(M_linear.order):
        X = R + M_linear @ X
    return X
