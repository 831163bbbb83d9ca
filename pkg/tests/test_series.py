import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dict_series_mul, leibniz_det
from sympy.polys.domains import QQ_I

from loophaf.errors import (
    ConstantTermNotOneError,
    DegreeOutOfRangeError,
    NonUnitConstantTermError,
    NonzeroConstantTermError,
    SeriesShapeMismatchError,
)
from loophaf.series import (
    SeriesMatrix,
    TruncatedSeries,
    coefficient,
    det_series,
    monomials,
    neumann_inverse_times,
    series_exp,
    series_inv_sqrt,
    series_inverse,
    series_mul,
)

T = TruncatedSeries


def z(k, nvars, order, exact=False):
    return T.variable(k, nvars, order, exact)


def random_series(rng, nvars, order, const=None, density=1.0, scale=0.5):
    size = len(monomials(nvars, order))
    c = rng.uniform(-scale, scale, size) + 1j * rng.uniform(-scale, scale, size)
    c[rng.random(size) > density] = 0
    if const is not None:
        c[0] = const
    return T(nvars, order, c)


def random_exact(rng, nvars, order, const=None, density=0.6):
    """Series with Gaussian-rational coefficients."""
    terms = {}
    for e in monomials(nvars, order):
        if rng.random() < density:
            terms[e] = QQ_I(int(rng.integers(-4, 5)), int(rng.integers(-4, 5))) / int(rng.integers(1, 4))
    if const is not None:
        terms[(0,) * nvars] = const
    return T.from_dict(terms, nvars, order, exact=True)


def test_graded_order_and_prefix():
    assert monomials(2, 2) == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))
    assert monomials(3, 4)[: len(monomials(3, 2))] == monomials(3, 2)


def test_mul_examples():
    x = z(0, 1, 2)
    prod = (1 + x) * (1 - x)
    assert prod.to_dict() == {(0,): 1, (2,): -1}
    assert (z(0, 2, 1) * z(1, 2, 1)).to_dict() == {}


def test_mul_against_convolution_oracle(rng):
    for _ in range(5):
        # small integer coefficients make both sums exact
        terms_a = {e: complex(*rng.integers(-5, 6, 2)) for e in monomials(3, 4) if rng.random() < 0.4}
        terms_b = {e: complex(*rng.integers(-5, 6, 2)) for e in monomials(3, 4) if rng.random() < 0.4}
        a, b = T.from_dict(terms_a, 3, 4), T.from_dict(terms_b, 3, 4)
        got = series_mul(a, b).to_dict()
        assert got == dict_series_mul(terms_a, terms_b, 4)


def test_mul_shape_mismatch():
    with pytest.raises(SeriesShapeMismatchError):
        z(0, 1, 2) * z(0, 2, 2)
    with pytest.raises(SeriesShapeMismatchError):
        z(0, 1, 2) * z(0, 1, 3)


def test_exp_examples():
    e = series_exp(z(0, 1, 3))
    np.testing.assert_allclose(e.coeffs, [1, 1, 1 / 2, 1 / 6], rtol=1e-15)
    assert series_exp(T.zero(2, 3)).to_dict() == {(0, 0): 1}
    e2 = series_exp(z(0, 2, 2) + z(1, 2, 2))
    assert coefficient(e2, (1, 1)) == 1


def test_exp_multinomial_oracle():
    from math import factorial
    e = series_exp(z(0, 3, 5) + z(1, 3, 5) + z(2, 3, 5))
    for k in monomials(3, 5):
        expected = 1 / (factorial(k[0]) * factorial(k[1]) * factorial(k[2]))
        assert abs(coefficient(e, k) - expected) <= 1e-15


def test_exp_rejects_constant():
    with pytest.raises(NonzeroConstantTermError):
        series_exp(1 + z(0, 1, 2))


def test_inv_sqrt_examples(rng):
    # (1 - 2z)^(-1/2) = sum_k C(2k, k) / 2^k z^k
    b = series_inv_sqrt(1 - 2 * z(0, 1, 5))
    from math import comb
    np.testing.assert_allclose(b.coeffs, [comb(2 * k, k) / 2**k for k in range(6)], rtol=1e-15)
    assert series_inv_sqrt(T.one(2, 3)).to_dict() == {(0, 0): 1}
    for nvars, order in [(1, 6), (2, 5), (3, 4)]:
        A = random_series(rng, nvars, order, const=1)
        B = series_inv_sqrt(A)
        assert B.constant_term == 1
        check = series_mul(B, series_mul(B, A))
        assert check.allclose(T.one(nvars, order), atol=1e-12)


def test_inv_sqrt_and_inverse_exact():
    rng = np.random.default_rng(1)
    A = random_exact(rng, 2, 4, const=QQ_I(1, 0))
    B = series_inv_sqrt(A)
    assert (B * B * A).to_dict() == {(0, 0): QQ_I(1, 0)}
    assert (series_inverse(A) * A).to_dict() == {(0, 0): QQ_I(1, 0)}


def test_inv_sqrt_rejects_constant():
    with pytest.raises(ConstantTermNotOneError):
        series_inv_sqrt(2 + z(0, 1, 2))
    with pytest.raises(ConstantTermNotOneError):
        series_inverse(z(0, 1, 2))


def test_coefficient_examples():
    s = 1 + 2 * z(0, 1, 2)
    assert coefficient(s, (1,)) == 2
    assert coefficient(s, (0,)) == 1
    assert coefficient(z(0, 2, 2) * z(1, 2, 2), (2, 0)) == 0
    with pytest.raises(DegreeOutOfRangeError):
        coefficient(s, (3,))


def test_det_2x2_by_hand():
    a, b, c = 0.3 + 0.1j, -0.2, 0.7j
    S = np.array([[a, b], [b, c]])
    zeta = z(0, 1, 2)
    Z = SeriesMatrix.from_entries([[T.zero(1, 2), zeta], [zeta, T.zero(1, 2)]])
    det = det_series(SeriesMatrix.identity(2, 1, 2) - Z @ S)
    np.testing.assert_allclose(det.coeffs, [1, -2 * b, b * b - a * c], atol=1e-15)
    assert det_series(SeriesMatrix.identity(3, 2, 3)).to_dict() == {(0, 0): 1}


def test_det_against_leibniz_exact():
    rng = np.random.default_rng(3)
    for _ in range(2):
        grid = [[random_exact(rng, 2, 4, const=QQ_I(int(i == j), 0)) for j in range(4)] for i in range(4)]
        got = det_series(SeriesMatrix.from_entries(grid))
        ref = leibniz_det(grid, lambda x, y: x * y, lambda x, y: x + y,
                          T.one(2, 4, exact=True), lambda x: -x)
        assert got.to_dict() == ref.to_dict()


def test_det_multiplicative(rng):
    def unit_matrix():
        grid = [[random_series(rng, 2, 4, const=float(i == j)) for j in range(3)] for i in range(3)]
        return SeriesMatrix.from_entries(grid)

    M1, M2 = unit_matrix(), unit_matrix()
    lhs = det_series(M1 @ M2)
    rhs = det_series(M1) * det_series(M2)
    assert lhs.allclose(rhs, atol=1e-12)


def test_det_rejects_non_identity_constant():
    with pytest.raises(NonUnitConstantTermError):
        det_series(SeriesMatrix.constant(2 * np.eye(2), 1, 2))


def test_neumann_examples(rng):
    R = SeriesMatrix.from_entries([[random_series(rng, 2, 3) for _ in range(2)] for _ in range(2)])
    zero = SeriesMatrix.constant(np.zeros((2, 2)), 2, 3)
    np.testing.assert_array_equal(neumann_inverse_times(zero, R).coeffs, R.coeffs)

    b = 0.4 - 0.3j
    M = SeriesMatrix.from_entries([[b * z(0, 1, 6)]])
    out = neumann_inverse_times(M, SeriesMatrix.identity(1, 1, 6))
    np.testing.assert_allclose(out.entry(0, 0).coeffs, [b**k for k in range(7)], rtol=1e-14)

    with pytest.raises(NonzeroConstantTermError):
        neumann_inverse_times(SeriesMatrix.identity(2, 2, 3), R)


def test_neumann_matches_dense_inverse(rng):
    m, order = 2, 12
    S = rng.uniform(-0.5, 0.5, (4, 4)) + 1j * rng.uniform(-0.5, 0.5, (4, 4))
    S = (S + S.T) / 2
    Z = np.zeros((4, 4, len(monomials(m, order))), dtype=complex)
    for j in range(m):
        r = monomials(m, order).index(tuple(int(i == j) for i in range(m)))
        Z[j, j + m, r] = Z[j + m, j, r] = 1
    Zs = SeriesMatrix(m, order, Z)
    out = neumann_inverse_times(Zs @ S, Zs)
    z0 = np.array([0.05 + 0.02j, -0.04j])
    Z0 = Zs.evaluate(z0)
    dense = np.linalg.solve(np.eye(4) - Z0 @ S, Z0)
    assert np.max(np.abs(out.evaluate(z0) - dense)) <= 1e-8


def test_ring_laws_exact():
    rng = np.random.default_rng(5)
    for nvars, order in [(1, 5), (2, 4), (3, 3)]:
        a, b, c = (random_exact(rng, nvars, order) for _ in range(3))
        assert ((a * b) * c).to_dict() == (a * (b * c)).to_dict()
        assert (a * (b + c)).to_dict() == (a * b + a * c).to_dict()
        assert (a * b).to_dict() == (b * a).to_dict()


@settings(max_examples=30, deadline=None)
@given(nvars=st.integers(1, 4), order=st.integers(0, 5), seed=st.integers(0, 2**32 - 1))
def test_ring_laws_float(nvars, order, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_series(rng, nvars, order) for _ in range(3))
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-12)
    assert (a * (b + c)).allclose(a * b + a * c, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(nvars=st.integers(1, 3), order=st.integers(0, 5), seed=st.integers(0, 2**32 - 1))
def test_exp_of_sum(nvars, order, seed):
    rng = np.random.default_rng(seed)
    a = random_series(rng, nvars, order, const=0)
    b = random_series(rng, nvars, order, const=0)
    assert series_exp(a + b).allclose(series_exp(a) * series_exp(b), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(nvars=st.integers(1, 3), order=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_truncation_consistency(nvars, order, seed):
    rng = np.random.default_rng(seed)
    lower = int(rng.integers(0, order + 1))
    a = random_series(rng, nvars, order, const=1)
    b = random_series(rng, nvars, order, const=0)
    for f in (lambda x, y: x * y, lambda x, y: series_inv_sqrt(x) * series_exp(y)):
        high = f(a, b).truncate(lower)
        low = f(a.truncate(lower), b.truncate(lower))
        assert high.allclose(low, atol=1e-13)


def test_evaluate_and_from_dict():
    s = T.from_dict({(1, 0): 2, (0, 2): 3, (3, 0): 9}, 2, 2)
    assert s.to_dict() == {(1, 0): 2, (0, 2): 3}
    assert s.evaluate([0.5, 2]) == 13
    assert s.min_degree() == 1
    assert T.zero(2, 2).min_degree() is None
    assert s.with_order(4).truncate(2).to_dict() == s.to_dict()
