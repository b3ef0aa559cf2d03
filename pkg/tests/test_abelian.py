import itertools
from math import comb
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncgpi1.abelian import (MorphismCheckFailed, NotInvertible, cayley_hamilton_residual, char_coefficients,
                            dm_derivative_check, dm_derivative_exact, dm_value, faddeev_leverrier,
                            invert_degree_zero, penrose_residuals, pseudoinverse, split, split_with_connections)
from ncgpi1.builders import jet, truncated_exponential
from ncgpi1.connections import FgpModule, connection_from_kappa
from ncgpi1.matrices import AlgMatrix
from ncgpi1.scalars import ExactScalar


def _cn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _det_oracle(M):
    """Coefficients of det(x - M) by Leibniz expansion over permutations with polynomial entries."""
    n = M.shape[0]
    total = np.zeros(n + 1, dtype=complex)
    for perm in itertools.permutations(range(n)):
        sign = np.linalg.det(np.eye(n)[list(perm)])
        poly = np.array([1.0 + 0j])
        for i, j in enumerate(perm):
            entry = np.array([1.0, -M[i, j]]) if i == j else np.array([-M[i, j]])
            poly = np.polymul(poly, entry)
        total[n + 1 - len(poly):] += sign * poly
    return total   # highest power first


def test_char_coefficients_of_diagonal_and_identity():
    a = char_coefficients(np.diag([1, 2, 3]).astype(complex))
    assert np.allclose(a, [6, 11, 6, 1])
    for n in range(1, 5):
        assert np.allclose(char_coefficients(np.eye(n, dtype=complex)), [comb(n, n - m) for m in range(n + 1)])


def test_char_coefficients_against_cofactor_oracle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        M = _cn(rng, 3, 3)
        a = char_coefficients(M)
        c = _det_oracle(M)
        n = 3
        # det(x - M) = sum_m (-1)^(n-m) a_m x^m
        mine = np.array([(-1) ** (n - m) * a[m] for m in range(n, -1, -1)])
        assert np.max(np.abs(mine - c)) <= 1e-10 * max(1, np.max(np.abs(c)))
        assert np.allclose(a, faddeev_leverrier(M), atol=1e-10)


def test_exact_char_coefficients_and_cayley_hamilton():
    M = np.array([[ExactScalar.gaussian(1), ExactScalar.gaussian(2, 1)],
                  [ExactScalar.gaussian(0, -1), ExactScalar.gaussian(F(1, 3))]], dtype=object)
    assert char_coefficients(M) == faddeev_leverrier(M)
    assert cayley_hamilton_residual(M) == 0


def test_char_coefficients_over_commutative_algebra():
    A = jet(4)
    x = A("x")
    M = AlgMatrix.from_elements(A, [[x, A.one()], [A.zero(), x * 2]])
    a = char_coefficients(M)
    assert a == faddeev_leverrier(M)
    assert (a[0] - x * x * 2).is_zero()


def test_pseudoinverse_examples():
    assert np.allclose(pseudoinverse(np.diag([1.0, 0.0]).astype(complex)).phi_plus, np.diag([1, 0]))
    P = pseudoinverse(np.array([[0, 2], [0, 0]], dtype=complex))
    assert P.m == 1 and P.rank == 1 and np.isclose(P.coefficients[1], 4)
    assert np.allclose(P.phi_plus, [[0, 0], [0.5, 0]])
    rng = np.random.default_rng(0)
    phi = _cn(rng, 4, 4)
    assert np.allclose(pseudoinverse(phi).phi_plus, np.linalg.inv(phi), atol=1e-10)


def test_exact_pseudoinverse():
    phi = np.array([[ExactScalar.gaussian(0), ExactScalar.gaussian(2)],
                    [ExactScalar.gaussian(0), ExactScalar.gaussian(0)]], dtype=object)
    P = pseudoinverse(phi)
    assert P.phi_plus[1, 0] == ExactScalar.gaussian(F(1, 2))
    assert all(v == 0 for v in penrose_residuals(phi, P.phi_plus).values())


def test_zero_matrix():
    P = pseudoinverse(np.zeros((2, 3), dtype=complex))
    assert P.rank == 0 and P.phi_plus.shape == (3, 2) and not P.phi_plus.any()


@pytest.mark.parametrize("seed", range(20))
def test_pseudoinverse_against_svd(seed):
    rng = np.random.default_rng(seed)
    r, c, k = rng.integers(1, 7), rng.integers(1, 7), rng.integers(1, 7)
    k = min(k, r, c)
    phi = _cn(rng, r, k) @ _cn(rng, k, c)
    P = pseudoinverse(phi)
    assert P.rank == np.linalg.matrix_rank(phi)
    assert np.linalg.norm(phi @ P.phi_plus @ phi - phi, 2) <= 1e-8 * max(1, np.linalg.norm(phi, 2))
    if P.well_margined():
        oracle = np.linalg.pinv(phi)
        assert np.linalg.norm(P.phi_plus - oracle, 2) <= 1e-6 * max(1, np.linalg.norm(oracle, 2))


def test_split_ranks():
    phi = np.eye(3, dtype=complex)
    S = split(phi)
    assert np.allclose(S.e_ker, 0) and np.allclose(S.e_coker, 0)
    S = split(np.zeros((2, 3), dtype=complex))
    assert np.allclose(S.e_ker, np.eye(3)) and np.allclose(S.e_coker, np.eye(2))
    S = split(np.array([[1, 1], [1, 1]], dtype=complex))
    assert np.isclose(np.trace(S.e_ker).real, 1) and np.isclose(np.trace(S.e_im).real, 1)


def test_split_with_connections_invertible_multiplier():
    A = jet(5)
    w = A("dx") * 3
    C1 = connection_from_kappa(FgpModule.free(A, 1), AlgMatrix.from_elements(A, [[w]]))
    C2 = connection_from_kappa(FgpModule.free(A, 1), AlgMatrix.zeros(A, 1, 1))
    a = truncated_exponential(A, 3)
    S = split_with_connections(AlgMatrix.from_elements(A, [[a]]), C1, C2)
    assert S.checks["ranks"] == {"ker": 0.0, "coim": 1.0, "im": 1.0, "coker": 0.0}
    assert S.checks["comparison"].passed
    with pytest.raises(MorphismCheckFailed):
        split_with_connections(AlgMatrix.from_elements(A, [[a]]), C2, C1)


def test_invert_degree_zero():
    A = jet(5)
    a = truncated_exponential(A, 2)
    assert (a * invert_degree_zero(a) - A.one()).is_zero()
    with pytest.raises(NotInvertible):
        invert_degree_zero(A("x"))


def _esym(values, m):
    return np.poly(values)[m] * (-1) ** m


def test_dm_value_matches_symmetric_functions_of_singular_values():
    rng = np.random.default_rng(5)
    for n in range(2, 6):
        M = _cn(rng, n, n)
        s2 = np.linalg.svd(M, compute_uv=False) ** 2
        for m in range(n + 1):
            assert np.isclose(dm_value(M, m), _esym(s2, m).real, rtol=1e-10)


def test_dm_exact_derivative_against_eigenvalue_finite_differences():
    rng = np.random.default_rng(9)
    for n in range(2, 5):
        M, K = _cn(rng, n, n), _cn(rng, n, n)
        A = M.conj().T @ M
        X = M.conj().T @ (M @ K - K @ M)
        H = X + X.conj().T
        for m in range(1, n + 1):
            def f(t):
                return _esym(np.linalg.eigvals(A + t * H), m).real
            h = 1e-3
            # Richardson-extrapolated central difference
            d1 = (f(h) - f(-h)) / (2 * h)
            d2 = (f(h / 2) - f(-h / 2)) / h
            oracle = (4 * d2 - d1) / 3
            assert dm_derivative_exact(M, K, m) == pytest.approx(oracle, rel=1e-6, abs=1e-6)


def test_dm_trivial_cases():
    M = np.array([[2.0 + 1j]])
    assert dm_derivative_check(M, np.array([[3.0 + 0j]]), 1).lhs == 0
    rng = np.random.default_rng(1)
    M = _cn(rng, 3, 3)
    assert dm_derivative_check(M, np.zeros((3, 3)), 2).lhs == 0


@given(st.integers(0, 2 ** 32 - 1))
def test_dm_inequality_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    M, K = _cn(rng, n, n), _cn(rng, n, n)
    assert all(dm_derivative_check(M, K, m).passed for m in range(n + 1))
