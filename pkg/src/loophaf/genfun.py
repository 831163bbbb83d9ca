"""Loop hafnians from generating functions, and a three-way cross-check.

Two series routes are implemented on top of :mod:`loophaf.series`:

* :func:`lemma_lhaf` reads one loop hafnian of an extended pair off the
  Taylor coefficient of ``exp(x^T S x / 2 + v^T x)``.
* :func:`lhaf_batch` expands ``exp(v^T (1 - Z S)^{-1} Z v / 2) / sqrt(det(1 - Z S))``
  in ``m`` variables and returns every loop hafnian of the paired extensions
  at once, where ``Z = [[0, diag(z)], [diag(z), 0]]``.

:func:`verify_master_theorem` compares both against brute-force enumeration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .combinatorial import DEFAULT_ENUM_CAP, lhaf_bruteforce
from .errors import CapExceededError, NonContractiveError, OddDimensionError, SingularMatrixError
from .matrix import (
    as_counts,
    as_square,
    as_vector,
    paired_extension,
    random_loop_vector,
    random_symmetric,
)
from .series import (
    SeriesMatrix,
    TruncatedSeries,
    coefficient,
    det_series,
    monomials,
    neumann_inverse_times,
    series_exp,
    series_inv_sqrt,
)

__all__ = [
    "DEFAULT_DEGREE_CAP",
    "LhafBatch",
    "VerificationRecord",
    "VerificationReport",
    "lemma_lhaf",
    "z_matrix",
    "master_lhs_series",
    "master_lhs_numeric",
    "lhaf_batch",
    "verify_master_theorem",
    "random_instances",
    "eq13_identity_check",
]

DEFAULT_DEGREE_CAP = 32


def _factorial_product(counts) -> int:
    return math.prod(math.factorial(n) for n in counts)


def lemma_lhaf(S, v, counts, *, degree_cap: int = DEFAULT_DEGREE_CAP) -> complex:
    """Loop hafnian of ``(extend_matrix(S, counts), extend_vector(v, counts))``.

    Computed as ``prod(n_j!)`` times the coefficient of ``prod(x_j**n_j)`` in
    ``exp(x^T S x / 2 + v^T x)``, truncated at total degree ``sum(counts)``.
    Variables with a zero count are dropped before expanding.
    """
    S = as_square(S)
    v = as_vector(v, S.shape[0])
    counts = as_counts(counts, S.shape[0])
    order = sum(counts)
    if order > degree_cap:
        raise CapExceededError(f"series degree {order} exceeds the cap {degree_cap}")
    if order == 0:
        return 1 + 0j
    active = [j for j, n in enumerate(counts) if n]
    S = S[np.ix_(active, active)]
    v = v[active]
    target = tuple(counts[j] for j in active)
    k = len(active)

    terms = {}
    for i in range(k):
        unit = [0] * k
        unit[i] = 1
        terms[tuple(unit)] = v[i]
        unit[i] = 2
        terms[tuple(unit)] = S[i, i] / 2
        for j in range(i + 1, k):
            unit = [0] * k
            unit[i] = unit[j] = 1
            terms[tuple(unit)] = S[i, j]
    gen = series_exp(TruncatedSeries.from_dict(terms, k, order))
    return complex(coefficient(gen, target) * _factorial_product(target))


def z_matrix(m: int, order: int) -> SeriesMatrix:
    """The ``2m x 2m`` series matrix ``[[0, diag(z)], [diag(z), 0]]``."""
    basis = monomials(m, order)
    c = np.zeros((2 * m, 2 * m, len(basis)), dtype=np.complex128)
    if order >= 1:
        for j in range(m):
            r = basis.index(tuple(int(i == j) for i in range(m)))
            c[j, j + m, r] = 1
            c[j + m, j, r] = 1
    return SeriesMatrix(m, order, c)


def _even_pair(S, v):
    S = as_square(S)
    dim = S.shape[0]
    if dim == 0 or dim % 2:
        raise OddDimensionError(
            f"the generating function needs a positive even dimension, got {dim}; "
            "embed odd-dimensional inputs with embed_odd first")
    return S, as_vector(v, dim)


def master_lhs_series(S, v, order: int) -> TruncatedSeries:
    """Taylor expansion in ``z_1..z_m`` of the loop-hafnian generating function.

    The determinant is formed at order ``max(order, 2m)`` (it is a polynomial
    of degree ``<= 2m``) before taking the inverse square root with constant
    term ``+1``; the resolvent comes from the truncated Neumann series.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    S, v = _even_pair(S, v)
    dim = S.shape[0]
    m = dim // 2
    work = max(order, dim)

    zs = z_matrix(m, work) @ S
    det = det_series(SeriesMatrix.identity(dim, m, work) - zs)
    prefactor = series_inv_sqrt(det).truncate(order)

    z = z_matrix(m, order)
    resolvent_z = neumann_inverse_times(zs.truncate(order), z)
    exponent = resolvent_z.quadratic_form(v) * 0.5
    return prefactor * series_exp(exponent)


def master_lhs_numeric(S, v, z) -> complex:
    """Closed-form value of the generating function at a numeric point near the origin.

    Uses the principal square root, which is the correct branch only while
    ``det(1 - Z S)`` stays close to 1.
    """
    S, v = _even_pair(S, v)
    m = S.shape[0] // 2
    z = np.asarray(z, dtype=np.complex128).reshape(m)
    Z = np.zeros_like(S)
    Z[np.arange(m), np.arange(m) + m] = z
    Z[np.arange(m) + m, np.arange(m)] = z
    A = np.eye(2 * m) - Z @ S
    return complex(np.exp(0.5 * v @ np.linalg.solve(A, Z @ v)) / np.sqrt(np.linalg.det(A)))


@dataclass
class LhafBatch:
    """Loop hafnians of every paired extension with ``sum(n) <= order``."""

    m: int
    order: int
    values: dict[tuple[int, ...], complex]

    def __getitem__(self, n) -> complex:
        return self.values[tuple(n)]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "order": self.order,
            "values": [{"n": list(n), "lhaf": [val.real, val.imag]} for n, val in self.values.items()],
        }


def lhaf_batch(S, v, order: int) -> LhafBatch:
    series = master_lhs_series(S, v, order)
    values = {
        n: complex(c * _factorial_product(n)) for n, c in zip(series.exponents, series.coeffs)
    }
    return LhafBatch(series.nvars, order, values)


@dataclass
class VerificationRecord:
    n: tuple[int, ...]
    genfun: complex
    lemma: complex
    brute: complex
    abs_dev_genfun: float
    abs_dev_lemma: float
    rel_dev_genfun: float | None  # None when the brute-force value is exactly 0
    rel_dev_lemma: float | None
    deviation: float
    instance: int = 0

    def to_dict(self) -> dict:
        pair = lambda c: [c.real, c.imag]  # noqa: E731
        return {
            "instance": self.instance,
            "n": list(self.n),
            "genfun": pair(self.genfun),
            "lemma": pair(self.lemma),
            "brute": pair(self.brute),
            "abs_dev_genfun": self.abs_dev_genfun,
            "abs_dev_lemma": self.abs_dev_lemma,
            "rel_dev_genfun": self.rel_dev_genfun,
            "rel_dev_lemma": self.rel_dev_lemma,
            "deviation": self.deviation,
        }


@dataclass
class VerificationReport:
    tol: float
    abs_floor: float
    records: list[VerificationRecord] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=lambda: {"genfun": 0.0, "lemma": 0.0, "brute": 0.0})

    @property
    def max_deviation(self) -> float:
        return max((r.deviation for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        return all(r.deviation <= self.tol for r in self.records)

    @classmethod
    def combine(cls, reports) -> VerificationReport:
        reports = list(reports)
        out = cls(reports[0].tol, reports[0].abs_floor)
        for rep in reports:
            out.records.extend(rep.records)
            for k, t in rep.timings.items():
                out.timings[k] = out.timings.get(k, 0.0) + t
        return out

    def to_dict(self, include_timings: bool = False) -> dict:
        """JSON-ready dict. Timings are opt-in so identical runs serialize identically."""
        summary = {
            "instances": len({r.instance for r in self.records}),
            "records": len(self.records),
            "tol": self.tol,
            "abs_floor": self.abs_floor,
            "max_deviation": self.max_deviation,
            "failures": sum(r.deviation > self.tol for r in self.records),
            "passed": self.passed,
        }
        if include_timings:
            summary["timings"] = dict(self.timings)
        return {"summary": summary, "records": [r.to_dict() for r in self.records]}


def _deviation(x: complex, ref: complex, abs_floor: float):
    a = abs(x - ref)
    r = a / abs(ref) if ref != 0 else None
    return a, r, (r if abs(ref) >= abs_floor else a)


def verify_master_theorem(S, v, order: int, tol: float = 1e-8, *, abs_floor: float = 1e-6,
                          cap: int = DEFAULT_ENUM_CAP, threads: int = 1,
                          instance: int = 0) -> VerificationReport:
    """Compare generating-function, lemma and brute-force loop hafnians for every ``sum(n) <= order``.

    The deviation of a record is the worse of the two routes against brute
    force, relative when ``|brute| >= abs_floor`` and absolute otherwise.
    """
    S, v = _even_pair(S, v)
    if 2 * order > cap:
        raise CapExceededError(
            f"order {order} needs brute force on {2 * order}x{2 * order} matrices, cap is {cap}")
    report = VerificationReport(tol, abs_floor)

    t0 = time.perf_counter()
    batch = lhaf_batch(S, v, order)
    report.timings["genfun"] += time.perf_counter() - t0

    for n, gval in batch.values.items():
        t0 = time.perf_counter()
        lval = lemma_lhaf(S, v, n + n)
        t1 = time.perf_counter()
        bval = lhaf_bruteforce(*paired_extension(S, v, n), cap=cap, threads=threads)
        t2 = time.perf_counter()
        report.timings["lemma"] += t1 - t0
        report.timings["brute"] += t2 - t1

        ag, rg, dg = _deviation(gval, bval, abs_floor)
        al, rl, dl = _deviation(lval, bval, abs_floor)
        report.records.append(VerificationRecord(
            n=n, genfun=gval, lemma=lval, brute=bval,
            abs_dev_genfun=ag, abs_dev_lemma=al, rel_dev_genfun=rg, rel_dev_lemma=rl,
            deviation=max(dg, dl), instance=instance,
        ))
    return report


def random_instances(count: int, m, seed: int, scale: float = 0.5):
    """Seeded ``(S, v)`` pairs; ``m`` is an int or a sequence of half-dimensions cycled through."""
    rng = np.random.default_rng(seed)
    ms = [m] if isinstance(m, int) else list(m)
    out = []
    for k in range(count):
        dim = 2 * ms[k % len(ms)]
        out.append((random_symmetric(dim, rng, scale), random_loop_vector(dim, rng, scale)))
    return out


def eq13_identity_check(S, z, *, cond_cap: float = 1e8) -> float:
    """Max entrywise gap between ``S^-1 - S^-1 (S^-1 - Z)^-1 S^-1`` and ``-(1 - Z S)^-1 Z``.

    Both sides are formed by dense solves at the numeric point ``z``.
    """
    S = as_square(S)
    dim = S.shape[0]
    if dim == 0 or dim % 2:
        raise OddDimensionError(f"need a positive even dimension, got {dim}")
    m = dim // 2
    z = np.asarray(z, dtype=np.complex128).reshape(m)
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularMatrixError(f"condition number {cond:.3e} exceeds {cond_cap:.1e}")
    Z = np.zeros((dim, dim), dtype=np.complex128)
    Z[np.arange(m), np.arange(m) + m] = z
    Z[np.arange(m) + m, np.arange(m)] = z
    rho = max(abs(np.linalg.eigvals(Z @ S)))
    if rho >= 1:
        raise NonContractiveError(f"spectral radius of Z S is {rho:.3f} >= 1")

    s_inv = np.linalg.solve(S, np.eye(dim))
    lhs = s_inv - s_inv @ np.linalg.solve(s_inv - Z, s_inv)
    rhs = -np.linalg.solve(np.eye(dim) - Z @ S, Z)
    return float(np.max(np.abs(lhs - rhs)))
