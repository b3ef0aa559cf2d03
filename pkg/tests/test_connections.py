from fractions import Fraction

import numpy as np
import pytest

from ncgpi1.builders import exterior, jet, truncated_exponential, two_point
from ncgpi1.connections import (Character, FgpConnection, FgpModule, NotAProjection, NotCommutative,
                                RestrictionEscapesCenter, ShapeMismatch, center_connection, check_connection,
                                check_morphism, connection_from_kappa, curvature, direct_sum, dual_connection,
                                dual_curvature_antisymmetry, fibre_functor, grassmannian, is_flat,
                                tensor_connection, tensor_curvature_additivity)
from ncgpi1.fuzz import random_connection
from ncgpi1.matrices import AlgMatrix, block_diag
from ncgpi1.scalars import NumericField
from ncgpi1.torus import TorusPresentation, torus_forms, weyl_form


def _eta(A, k, c=1):
    return A(f"eta{k}") * c


def _rank1(A, form):
    return connection_from_kappa(FgpModule.free(A, 1), AlgMatrix.from_elements(A, [[form]]))


def test_grassmannian_of_free_module_is_d():
    A = exterior(2)
    C = grassmannian(FgpModule.free(A, 2))
    assert C.kappa.is_zero()
    assert check_connection(C).passed
    assert curvature(C).matrix.is_zero()


def test_constant_projection_over_exterior():
    A = exterior(2)
    C = grassmannian(FgpModule(A, AlgMatrix.from_scalars(A, [[1, 0], [0, 0]])))
    assert C.kappa.is_zero() and check_connection(C).passed


def test_nonconstant_projection_over_jet():
    # rotation projection [[cos^2, cos sin], [cos sin, sin^2]] at angle x, truncated mod x^4
    A = jet(4)
    x, x2, x3 = A("x"), A("x^2"), A("x^3")
    off = x - x3 * Fraction(2, 3)
    p = AlgMatrix.from_elements(A, [[A.one() - x2, off], [off, x2]])
    C = grassmannian(FgpModule(A, p))
    rep = check_connection(C)
    assert rep.passed, rep.first_failure()
    cur = curvature(C)
    assert cur.bilinearity.passed and cur.closed_form.passed


def test_non_idempotent_projection_rejected():
    A = exterior(1)
    with pytest.raises(NotAProjection):
        FgpModule(A, AlgMatrix.from_scalars(A, [[2]]))


def test_d_plus_eta_passes_and_corruption_is_witnessed():
    A = exterior(2)
    assert check_connection(_rank1(A, _eta(A, 1))).passed
    p = AlgMatrix.from_scalars(A, [[1, 0], [0, 0]])
    bad = AlgMatrix.from_elements(A, [[A.zero(), _eta(A, 1)], [A.zero(), A.zero()]])
    rep = check_connection(FgpConnection(FgpModule(A, p), bad))
    r = rep.result("normal_form")
    assert not r.passed and r.witness["entry"][:2] == [0, 1]


def test_curvature_examples():
    A = exterior(2)
    assert is_flat(_rank1(A, A.zero()))
    assert is_flat(_rank1(A, _eta(A, 1, 5)))
    alpha, beta = [[0, 1], [0, 0]], [[0, 0], [1, 0]]
    kappa = AlgMatrix.from_elements(A, [[_eta(A, 1, alpha[i][j]) + _eta(A, 2, beta[i][j]) for j in range(2)]
                                        for i in range(2)])
    C = connection_from_kappa(FgpModule.free(A, 2), kappa)
    R = curvature(C)
    # kappa kappa = eta1 eta2 (alpha beta - beta alpha) with kappa acting on the left
    comm = np.array(alpha) @ np.array(beta) - np.array(beta) @ np.array(alpha)
    expected = AlgMatrix.from_elements(A, [[A("eta1^eta2") * int(comm[i, j]) for j in range(2)] for i in range(2)])
    assert (R.matrix - expected).is_zero()
    assert not is_flat(C)
    assert R.bilinearity.passed and R.closed_form.passed


def test_tensor_of_rank_one_connections_adds():
    A = exterior(2)
    G = tensor_connection(_rank1(A, _eta(A, 1, 2)), _rank1(A, _eta(A, 1, 3)))
    assert (G.kappa - AlgMatrix.from_elements(A, [[_eta(A, 1, 5)]])).is_zero()
    d = _rank1(A, A.zero())
    assert tensor_connection(d, d).kappa.is_zero()


def test_dual_of_free_connection():
    A = exterior(2)
    kappa = AlgMatrix.from_elements(A, [[_eta(A, 1), _eta(A, 2, 3)], [A.zero(), _eta(A, 1, -1)]])
    C = connection_from_kappa(FgpModule.free(A, 2), kappa)
    D = dual_connection(C)
    assert D.pairing_check.passed
    assert (D.connection.kappa + kappa.T).is_zero()
    assert dual_connection(_rank1(A, A.zero())).connection.kappa.is_zero()


def test_tensor_requires_commutative_owner():
    A = two_point(3)
    C = grassmannian(FgpModule.free(A, 1))
    with pytest.raises(NotCommutative):
        tensor_connection(C, C)


def test_tensor_rejects_different_algebras():
    with pytest.raises(ShapeMismatch):
        tensor_connection(grassmannian(FgpModule.free(exterior(1), 1)), grassmannian(FgpModule.free(exterior(2), 1)))


@pytest.mark.parametrize("seed", range(8))
def test_random_curvature_laws_and_direct_sum(seed):
    rng = np.random.default_rng(seed)
    A = exterior(3, NumericField(1e-12))
    C1, C2 = random_connection(A, rng, 2), random_connection(A, rng, 3)
    assert tensor_curvature_additivity(C1, C2, 1e-10).passed
    assert dual_curvature_antisymmetry(C1, 1e-10).passed
    S = direct_sum(C1, C2)
    R = curvature(S, 1e-10).matrix
    expected = block_diag(curvature(C1, 1e-10).matrix, curvature(C2, 1e-10).matrix)
    assert R.equals(expected, 1e-10)


def test_flat_direct_sum_is_flat():
    A = exterior(2)
    assert is_flat(direct_sum(_rank1(A, _eta(A, 1)), _rank1(A, _eta(A, 2))))


def test_morphism_examples():
    A = jet(5)
    C = _rank1(A, A("dx") * 2)
    assert check_morphism(AlgMatrix.identity(A, 1), C, C).passed
    a = truncated_exponential(A, 2)
    assert (a.d() - a * (A("dx") * 2)).is_zero()
    phi = AlgMatrix.from_elements(A, [[a]])
    assert check_morphism(phi, C, _rank1(A, A.zero())).passed
    assert not check_morphism(phi, _rank1(A, A.zero()), C).passed


def test_random_morphism_fails_with_residual():
    rng = np.random.default_rng(3)
    A = exterior(2, NumericField(1e-12))
    C1, C2 = random_connection(A, rng, 2, full_rank=True), random_connection(A, rng, 2, full_rank=True)
    phi = AlgMatrix.from_scalars(A, rng.standard_normal((2, 2)))
    rep = check_morphism(phi, C1, C2)
    r = rep.result("intertwines")
    assert not r.passed and r.margin > 1e-3


def test_center_connection_on_torus_keeps_the_formula():
    T = TorusPresentation.rational_2d("1/2", 2)
    A = torus_forms(T, 2)
    C = _rank1(A, weyl_form(A, [0, 0], (1,)) * 3)
    red = center_connection(C)
    Z = red.connection.algebra
    assert (red.connection.kappa - AlgMatrix.from_elements(Z, [[Z("eta1") * 3]])).is_zero()


def test_center_connection_of_two_point_grassmannian_is_d():
    A = two_point(5)
    red = center_connection(grassmannian(FgpModule.free(A, 2)))
    assert red.connection.kappa.is_zero()
    assert red.connection.algebra.basis_of_degree(0) and len(red.connection.algebra.basis_of_degree(0)) == 1


def test_center_connection_rejects_non_central_coefficients():
    T = TorusPresentation.rational_2d("1/2", 2)
    A = torus_forms(T, 2)
    with pytest.raises(RestrictionEscapesCenter):
        center_connection(_rank1(A, weyl_form(A, [1, 0], (1,))))


def test_fibres():
    A = jet(3)
    chi = Character(A, {"1": 1, "x": 0, "x^2": 0})
    assert fibre_functor(FgpModule.free(A, 3), chi).dimension == 3
    assert fibre_functor(FgpModule(A, AlgMatrix.from_scalars(A, [[1, 0], [0, 0]])), chi).dimension == 1
