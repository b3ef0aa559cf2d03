import cmath
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncgpi1.scalars import (EXACT, ExactDivisionError, ExactScalar, NumericField, PhaseExponent, field_for,
                            to_fraction)

THETA = (2 ** 0.5 - 1,)
small_q = st.fractions(min_value=-3, max_value=3, max_denominator=6)
rational_phase = st.builds(lambda p, q: PhaseExponent(F(p, q)), st.integers(-12, 12), st.integers(1, 6))


@st.composite
def exact_scalars(draw, irrational=True):
    total = ExactScalar.gaussian(0)
    for _ in range(draw(st.integers(0, 3))):
        irr = [draw(st.integers(-2, 2))] if irrational and draw(st.booleans()) else []
        ph = PhaseExponent(F(draw(st.integers(-12, 12)), draw(st.integers(1, 6))), irr)
        total = total + ExactScalar.from_phase(ph, draw(small_q), draw(small_q))
    return total


def test_roots_of_unity_cancel():
    w = ExactScalar.from_phase(PhaseExponent(F(2, 3)))
    assert (1 + w + w * w).is_zero()
    assert ExactScalar.from_phase(PhaseExponent(F(1, 2))) == ExactScalar.gaussian(0, 1)
    assert ExactScalar.from_phase(PhaseExponent(1)) == -1


def test_phase_exponents_are_mod_two():
    assert PhaseExponent(F(3, 2)) == PhaseExponent(F(-1, 2))
    assert PhaseExponent(F(1, 3), [1]).value(THETA) == pytest.approx(cmath.exp(1j * cmath.pi * (1 / 3 + THETA[0])))


def test_irrational_inverse_and_its_limit():
    t = ExactScalar.from_phase(PhaseExponent(0, [1]))
    assert t.invertible_here() and t * t.inverse() == 1
    mixed = t - ExactScalar.from_phase(PhaseExponent(0, [-1]))
    assert not mixed.invertible_here()
    with pytest.raises(ExactDivisionError):
        mixed.inverse()


def test_gaussian_inverse_and_conjugate():
    x = ExactScalar.gaussian(F(1, 2), 3)
    assert x * x.inverse() == 1
    assert x.conjugate() == ExactScalar.gaussian(F(1, 2), -3)
    assert complex(x) == 0.5 + 3j


def test_to_fraction_accepts_strings_and_ints():
    assert to_fraction("3/4") == F(3, 4)
    assert to_fraction(2) == F(2)


def test_numeric_field_tolerance():
    f = NumericField(1e-9)
    assert f.is_zero(1e-10) and not f.is_zero(1e-8)
    assert field_for("numeric", 1e-9).tol == 1e-9
    assert field_for("exact") is EXACT


@given(exact_scalars(), exact_scalars(), exact_scalars())
def test_ring_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert (a - a).is_zero()


@given(exact_scalars(), exact_scalars())
def test_evaluation_is_a_homomorphism(a, b):
    assert (a * b).to_complex(THETA) == pytest.approx(a.to_complex(THETA) * b.to_complex(THETA), abs=1e-9)
    assert (a + b).to_complex(THETA) == pytest.approx(a.to_complex(THETA) + b.to_complex(THETA), abs=1e-9)
    assert a.conjugate().to_complex(THETA) == pytest.approx(a.to_complex(THETA).conjugate(), abs=1e-9)


@given(exact_scalars(irrational=False))
def test_zero_test_is_complete_on_rational_phases(a):
    assert a.is_zero() == (abs(complex(a)) < 1e-9)


@given(exact_scalars(irrational=False))
def test_inverse_of_nonzero_cyclotomic(a):
    if not a.is_zero():
        assert a * a.inverse() == 1
