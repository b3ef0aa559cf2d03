import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix

from ncgpi1.algebra import check_dga_axioms
from ncgpi1.connections import FgpConnection, FgpModule, curvature
from ncgpi1.errors import InvalidInput
from ncgpi1.fuzz import random_theta, random_unimodular
from ncgpi1.lattice import hnf
from ncgpi1.matrices import AlgMatrix
from ncgpi1.scalars import ExactScalar, NumericField, PhaseExponent
from ncgpi1.torus import (Inconclusive, NonCommutingEndos, NotInNormalForm, TorusPresentation, brute_force_lattice,
                          center_crosscheck, connection_from_endos, endos_from_connection, gamma_subgroup,
                          lattice_Lambda, pi1_descriptor, torus_forms, weyl, weyl_form, weyl_mul)

seeds = st.integers(0, 2 ** 32 - 1)


def mixed_3x3():
    """Theta_12 = theta1, every other coupling zero."""
    z = (0, [])
    return TorusPresentation.from_matrix([[z, (0, [1]), z], [(0, [-1]), z, z], [z, z, z]], 3, ("theta1",),
                                         (2 ** 0.5 - 1,))


def _determinantal_divisors(B):
    """Invariant factors as ratios of gcds of k x k minors (independent of any normal form code)."""
    M = Matrix(B)
    r, c = M.shape
    gs = [1]
    for k in range(1, min(r, c) + 1):
        g = 0
        for rows in itertools.combinations(range(r), k):
            for cols in itertools.combinations(range(c), k):
                g = math.gcd(g, int(M.extract(list(rows), list(cols)).det()))
        if g == 0:
            break
        gs.append(g)
    return [gs[k] // gs[k - 1] for k in range(1, len(gs))]


# --- Weyl elements ---------------------------------------------------------------------

def test_weyl_phase_and_commutation():
    theta = F(1, 3)
    T = TorusPresentation.rational_2d(theta)
    uv = weyl_mul(weyl((1, 0)), weyl((0, 1)), T)
    vu = weyl_mul(weyl((0, 1)), weyl((1, 0)), T)
    assert uv.exponent == (1, 1) and uv.phase == PhaseExponent(theta)
    assert uv.phase - vu.phase == PhaseExponent(2 * theta)
    r = (2, -1)
    inv = weyl_mul(weyl(r), weyl((-2, 1)), T)
    assert inv.exponent == (0, 0) and inv.phase.is_trivial()


def test_weyl_window_policy():
    from ncgpi1.algebra import OutOfWindow

    T = TorusPresentation.rational_2d(F(1, 2), radius=1)
    with pytest.raises(OutOfWindow):
        weyl_mul(weyl((1, 0)), weyl((1, 0)), T)
    assert weyl_mul(weyl((1, 0)), weyl((1, 0)), T, policy="drop") is None


@given(seeds)
def test_cocycle_associativity_and_commutator(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    T = random_theta(rng, n)
    r, s, t = (tuple(int(v) for v in rng.integers(-3, 4, n)) for _ in range(3))
    add = lambda a, b: tuple(x + y for x, y in zip(a, b))  # noqa: E731
    assert T.cocycle(r, s) + T.cocycle(add(r, s), t) == T.cocycle(s, t) + T.cocycle(r, add(s, t))
    left = weyl_mul(weyl_mul(weyl(r), weyl(s), T), weyl(t), T)
    right = weyl_mul(weyl(r), weyl_mul(weyl(s), weyl(t), T), T)
    assert left.exponent == right.exponent and left.phase == right.phase
    neg = lambda v: tuple(-x for x in v)  # noqa: E731
    c = weyl_mul(weyl_mul(weyl_mul(weyl(r), weyl(s), T), weyl(neg(r)), T), weyl(neg(s)), T)
    e = T.bilinear(r, s).scale(2)
    assert not any(c.exponent) and c.phase == PhaseExponent(e.rational, e.irrational)


# --- torus forms ------------------------------------------------------------------------

def test_forms_differential():
    T = TorusPresentation.rational_2d(F(1, 3), radius=2)
    A = torus_forms(T, 2)
    u, v = weyl_form(A, (1, 0)), weyl_form(A, (0, 1))
    eta1, eta2 = weyl_form(A, (0, 0), (1,)), weyl_form(A, (0, 0), (2,))
    uv = u * v
    assert (uv.d() - uv * (eta1 + eta2)).is_zero()
    assert (uv.d() - (u.d() * v + u * v.d())).is_zero()
    w = weyl_form(A, (2, -1))
    assert w.d().degree == 1 and w.d().d().is_zero()


def test_degree_zero_commutator():
    theta = F(1, 3)
    T = TorusPresentation.rational_2d(theta, radius=2)
    A = torus_forms(T, 1)
    u, v = weyl_form(A, (1, 0)), weyl_form(A, (0, 1))
    # uv = lambda vu with lambda = exp(2 pi i theta), so [u, v] = (1 - lambda^-1) uv
    lam_inv = ExactScalar.from_phase(PhaseExponent(-2 * theta))
    assert (u * v - v * u - (u * v) * (1 - lam_inv)).is_zero()
    assert not (u * v - v * u).is_zero()


def test_star_on_forms():
    T = TorusPresentation.rational_2d(F(1, 2), radius=1)
    A = torus_forms(T, 2)
    assert A.star_convention == "koszul"
    x = weyl_form(A, (-1, -1), (1,))
    assert (x.star() + weyl_form(A, (1, 1), (1,))).is_zero()


def test_small_torus_axioms():
    A = torus_forms(TorusPresentation.rational_2d(F(1, 3), radius=1), 2)
    rep = check_dga_axioms(A)
    assert rep.passed, rep.first_failure()
    A = torus_forms(TorusPresentation.irrational_2d(radius=1), 2)
    assert check_dga_axioms(A).passed


@pytest.mark.slow
def test_torus_axioms_third_radius_three():
    rep = check_dga_axioms(torus_forms(TorusPresentation.rational_2d(F(1, 3), radius=3), 2))
    assert rep.passed, rep.first_failure()


# --- lattice, Gamma, descriptor -------------------------------------------------------------

@pytest.mark.parametrize("q", [2, 3, 5])
def test_rational_lattice(q):
    T = TorusPresentation.rational_2d(F(1, q))
    L = lattice_Lambda(T)
    assert L.basis == ((q, 0), (0, q))
    assert gamma_subgroup(L).invariant_factors == (q, q)
    D = pi1_descriptor(T)
    assert D.m == 2 and D.hull_text() == "algebraic hull of Z²" and D.hull_text(ascii=True) == "algebraic hull of Z^2"


def test_irrational_and_zero_theta():
    D = pi1_descriptor(TorusPresentation.irrational_2d())
    assert D.m == 0 and D.hull_text() == "algebraic hull of R²"
    assert D.gamma.text == "T^2"
    Z = TorusPresentation.from_matrix([[0] * 3] * 3)
    L = lattice_Lambda(Z)
    assert L.m == 3 and gamma_subgroup(L).text == "trivial"


def test_gamma_of_third():
    assert gamma_subgroup(lattice_Lambda(TorusPresentation.rational_2d(F(2, 3)))).text == "(Z/3)^2"


def test_mixed_case():
    T = mixed_3x3()
    D = pi1_descriptor(T)
    assert D.m == 1 and D.lattice.basis == ((0, 0, 1),)
    assert D.hull_text() == "algebraic hull of Z¹ × R²"
    brute = set(brute_force_lattice(T, 6))
    assert brute == {r for r in T.window(6) if D.lattice.contains(r)}


@given(seeds)
def test_lattice_closure_and_membership(seed):
    rng = np.random.default_rng(seed)
    T = random_theta(rng, int(rng.integers(2, 4)), irrational=bool(rng.integers(2)))
    L = lattice_Lambda(T)
    for a in L.basis:
        assert all(e.is_integer() for e in T.theta_times(a))
        for b in L.basis:
            assert L.contains([x + y for x, y in zip(a, b)]) and L.contains([-x for x in a])
    assert hnf([list(b) for b in L.basis]) == [list(b) for b in L.basis] if L.basis else True
    brute = set(brute_force_lattice(T, 3))
    assert brute == {r for r in T.window(3) if L.contains(r)}


@given(seeds)
def test_m_invariant_under_unimodular_change(seed):
    rng = np.random.default_rng(seed)
    T = random_theta(rng, int(rng.integers(2, 4)))
    U = random_unimodular(rng, T.n)
    assert pi1_descriptor(T).m == pi1_descriptor(T.conjugated(U)).m


@given(seeds)
def test_gamma_against_determinantal_divisors(seed):
    rng = np.random.default_rng(seed)
    T = random_theta(rng, int(rng.integers(2, 4)), irrational=False)
    L = lattice_Lambda(T)
    assert list(gamma_subgroup(L).invariant_factors) == _determinantal_divisors([list(b) for b in L.basis])


# --- center cross-check -----------------------------------------------------------------------

@pytest.mark.parametrize("T,R", [(TorusPresentation.rational_2d(F(1, 2)), 3),
                                 (TorusPresentation.rational_2d(F(1, 3)), 4),
                                 (TorusPresentation.irrational_2d(), 3)], ids=["half", "third", "irrational"])
def test_center_crosscheck(T, R):
    cc = center_crosscheck(T, R)
    assert cc.passed


def test_center_of_irrational_torus_is_trivial():
    cc = center_crosscheck(TorusPresentation.irrational_2d(), 3)
    assert cc.computed_dims == {0: 1, 1: 2}


def test_commutative_torus_center_is_everything():
    cc = center_crosscheck(TorusPresentation.from_matrix([[0, 0], [0, 0]]), 2)
    assert cc.passed and cc.computed_dims[0] == 9


def test_center_crosscheck_inconclusive():
    with pytest.raises(Inconclusive):
        center_crosscheck(TorusPresentation.rational_2d(F(1, 3)), 3)
    with pytest.raises(Inconclusive):
        center_crosscheck(TorusPresentation.rational_2d(F(1, 2)), 3, D_max=1)


# --- flat connections ----------------------------------------------------------------------------

def test_endos_examples():
    T = TorusPresentation.rational_2d(F(1, 2))
    C = connection_from_endos([np.zeros((2, 2), int), np.zeros((2, 2), int)], T)
    assert C.kappa.is_zero()
    C = connection_from_endos([np.diag([1, 2]), np.diag([3, -1])], T)
    assert curvature(C).matrix.is_zero()
    a, b = np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])
    with pytest.raises(NonCommutingEndos):
        connection_from_endos([a, b], T)
    R = curvature(connection_from_endos([a, b], T, force=True)).matrix
    A = R.algebra
    top = weyl_form(A, (0, 0), (1, 2))
    expected = AlgMatrix.from_elements(A, [[top, A.zero()], [A.zero(), top * -1]])
    assert (R - expected).is_zero()


def test_endos_round_trip():
    T = TorusPresentation.rational_2d(F(1, 3))
    A = torus_forms(T, 2, field=NumericField(1e-12), radius=1)
    rng = np.random.default_rng(12)
    for _ in range(5):
        P = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        Pi = np.linalg.inv(P)
        E = [P @ np.diag(rng.standard_normal(3)) @ Pi for _ in range(2)]
        C = connection_from_endos(E, T, A)
        back = endos_from_connection(C)
        assert all(np.allclose(x, y, atol=1e-12) for x, y in zip(back, E))
    assert all(not x.any() for x in endos_from_connection(connection_from_endos([np.zeros((1, 1))] * 2, T, A)))


def test_non_constant_kappa_rejected():
    T = TorusPresentation.rational_2d(F(1, 2))
    A = torus_forms(T, 2, radius=1)
    kappa = AlgMatrix.from_elements(A, [[weyl_form(A, (1, 0), (1,))]])
    with pytest.raises(NotInNormalForm):
        endos_from_connection(FgpConnection(FgpModule.free(A, 1), kappa))


# --- files ------------------------------------------------------------------------------------------

def test_presentation_round_trip_and_validation():
    for T in (TorusPresentation.rational_2d(F(2, 5)), TorusPresentation.irrational_2d(), mixed_3x3()):
        assert TorusPresentation.from_dict(T.to_dict()) == T
    doc = TorusPresentation.rational_2d(F(1, 2)).to_dict()
    doc["theta"][1][0] = {"rational": "1/2", "irrational": {}}
    with pytest.raises(InvalidInput, match=r"theta\[\d\]\[\d\]"):
        TorusPresentation.from_dict(doc)
    doc = TorusPresentation.irrational_2d().to_dict()
    doc["theta"][0][1]["irrational"] = {"theta9": "1"}
    with pytest.raises(InvalidInput):
        TorusPresentation.from_dict(doc)
