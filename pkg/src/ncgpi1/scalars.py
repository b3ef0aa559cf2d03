"""Scalar arithmetic for exact and floating-point computations.

Exact scalars are finite sums ``c * exp(i*pi*phi)`` where ``c`` is a Gaussian
rational and ``phi`` is an element of ``Q + Q*theta_1 + ... + Q*theta_k``.  The
irrational generators ``theta_j`` are treated as formally independent over the
rationals, so two phase characters with different irrational parts never
cancel.  Rational phases are folded into ``[0, 1/2)`` by absorbing powers of
``i`` into the coefficient, and zero testing for sums of roots of unity is
decided by reduction modulo a cyclotomic polynomial.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence

_HALF = Fraction(1, 2)


class ExactDivisionError(ArithmeticError):
    """Raised when an exact scalar has no inverse we can represent."""


class ModeMismatch(TypeError):
    """Raised when exact and floating-point scalars are combined."""


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings.  Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ModeMismatch(f"cannot use {type(value).__name__} {value!r} as an exact rational")


def fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _strip(coeffs: Iterable[Fraction]) -> tuple[Fraction, ...]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class PhaseExponent:
    """An exponent ``phi`` of the character ``exp(i*pi*phi)``.

    The rational part is stored modulo 2, the irrational part as a tuple of
    coefficients of ``theta_1, theta_2, ...`` with trailing zeros removed.
    """

    __slots__ = ("rational", "irrational")

    def __init__(self, rational=0, irrational: Sequence = ()):
        self.rational = to_fraction(rational) % 2
        self.irrational = _strip(to_fraction(c) for c in irrational)

    @classmethod
    def _raw(cls, rational: Fraction, irrational: tuple) -> "PhaseExponent":
        obj = cls.__new__(cls)
        obj.rational = rational % 2
        obj.irrational = irrational
        return obj

    def __eq__(self, other):
        if not isinstance(other, PhaseExponent):
            return NotImplemented
        return self.rational == other.rational and self.irrational == other.irrational

    def __hash__(self):
        return hash((self.rational, self.irrational))

    def __add__(self, other: "PhaseExponent") -> "PhaseExponent":
        return PhaseExponent._raw(self.rational + other.rational,
                                  _add_irr(self.irrational, other.irrational))

    def __neg__(self) -> "PhaseExponent":
        return PhaseExponent._raw(-self.rational, tuple(-c for c in self.irrational))

    def __sub__(self, other: "PhaseExponent") -> "PhaseExponent":
        return self + (-other)

    def scale(self, k: int) -> "PhaseExponent":
        return PhaseExponent._raw(self.rational * k, _strip(c * k for c in self.irrational))

    def is_trivial(self) -> bool:
        return self.rational == 0 and not self.irrational

    def angle(self, theta_values: Sequence[float] = ()) -> float:
        """The real number ``phi`` (rational part in [0, 2)) for bound theta values."""
        if len(self.irrational) > len(theta_values):
            raise ValueError("phase has irrational part but theta values were not supplied")
        return float(self.rational) + sum(float(c) * t for c, t in zip(self.irrational, theta_values))

    def value(self, theta_values: Sequence[float] = ()) -> complex:
        return cmath.exp(1j * math.pi * self.angle(theta_values))

    def __repr__(self):
        parts = [fraction_text(self.rational)]
        parts += [f"{fraction_text(c)}*theta{j + 1}" for j, c in enumerate(self.irrational) if c]
        return "PhaseExponent(" + " + ".join(parts) + ")"


def _add_irr(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    n = max(len(a), len(b))
    return _strip((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def _times_i_power(re: Fraction, im: Fraction, k: int) -> tuple[Fraction, Fraction]:
    k %= 4
    if k == 0:
        return re, im
    if k == 1:
        return -im, re
    if k == 2:
        return -re, -im
    return im, -re


def _fold(rational: Fraction, re: Fraction, im: Fraction):
    """Move ``rational`` into [0, 1/2) by multiplying the coefficient by i^k."""
    rational %= 2
    k = math.floor(rational * 2)
    if k:
        re, im = _times_i_power(re, im, k)
        rational -= Fraction(k, 2)
    return rational, re, im


@lru_cache(maxsize=256)
def _cyclotomic(m: int) -> tuple[int, ...]:
    from sympy.polys.specialpolys import cyclotomic_poly

    # coefficients from x^0 upwards
    return tuple(int(c) for c in reversed(cyclotomic_poly(m, polys=True).all_coeffs()))


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _group_polynomial(terms: Sequence[tuple[Fraction, Fraction, Fraction]]):
    """Write ``sum c_j exp(i pi a_j)`` as ``P(zeta_M)`` with ``P`` in Q[x]."""
    m = _lcm([4] + [2 * a.denominator for a, _, _ in terms])
    poly: dict[int, Fraction] = {}
    quarter = m // 4
    for a, re, im in terms:
        e = int(a * m / 2)
        if re:
            poly[e] = poly.get(e, 0) + re
        if im:
            poly[e + quarter] = poly.get(e + quarter, 0) + im
    return m, poly


def _reduce_mod_cyclotomic(poly: dict[int, Fraction], m: int) -> dict[int, Fraction]:
    phi = _cyclotomic(m)
    deg = len(phi) - 1
    poly = {e: c for e, c in poly.items() if c}
    while poly:
        top = max(poly)
        if top < deg:
            break
        c = poly.pop(top)
        shift = top - deg
        for j, pj in enumerate(phi[:-1]):
            if pj:
                key = shift + j
                v = poly.get(key, 0) - c * pj
                if v:
                    poly[key] = v
                else:
                    poly.pop(key, None)
    return poly


_UNIT_TERMS = {(Fraction(0), ()): (Fraction(1), Fraction(0))}


class ExactScalar:
    """Exact element of the span of phase characters over Q(i).

    ``terms`` maps ``(a, irrational)`` with ``a`` in [0, 1/2) to a Gaussian
    rational ``(re, im)``; zero coefficients are never stored.  Values are not
    hashable because the representation is not canonical for sums of roots of
    unity; equality is decided by a complete zero test.
    """

    __slots__ = ("terms",)
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}

    # construction -------------------------------------------------------
    @classmethod
    def gaussian(cls, re=0, im=0) -> "ExactScalar":
        re, im = to_fraction(re), to_fraction(im)
        if re == 0 and im == 0:
            return cls({})
        return cls({(Fraction(0), ()): (re, im)})

    @classmethod
    def from_phase(cls, phase: PhaseExponent, re=1, im=0) -> "ExactScalar":
        re, im = to_fraction(re), to_fraction(im)
        a, re, im = _fold(phase.rational, re, im)
        if re == 0 and im == 0:
            return cls({})
        return cls({(a, phase.irrational): (re, im)})

    @classmethod
    def coerce(cls, value) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, complex):
            raise ModeMismatch("complex floats cannot enter exact arithmetic")
        return cls.gaussian(value)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for key, (re, im) in other.terms.items():
            if key in out:
                r0, i0 = out[key]
                r, i = r0 + re, i0 + im
                if r or i:
                    out[key] = (r, i)
                else:
                    del out[key]
            else:
                out[key] = (re, im)
        return ExactScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar({k: (-r, -i) for k, (r, i) in self.terms.items()})

    def __sub__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            if other == 1:
                return self
            if other == 0:
                return ExactScalar({})
            return ExactScalar({k: (r * other, i * other) for k, (r, i) in self.terms.items()})
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        if not self.terms or not other.terms:
            return ExactScalar({})
        if other.terms == _UNIT_TERMS:
            return self
        if self.terms == _UNIT_TERMS:
            return other
        out: dict = {}
        for (a1, t1), (r1, i1) in self.terms.items():
            for (a2, t2), (r2, i2) in other.terms.items():
                re = r1 * r2 - i1 * i2
                im = r1 * i2 + i1 * r2
                a = a1 + a2
                if a >= _HALF:
                    a -= _HALF
                    re, im = -im, re
                key = (a, _add_irr(t1, t2))
                if key in out:
                    r0, i0 = out[key]
                    re, im = r0 + re, i0 + im
                if re or im:
                    out[key] = (re, im)
                else:
                    out.pop(key, None)
        return ExactScalar(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) * self.inverse()

    def conjugate(self) -> "ExactScalar":
        out = ExactScalar({})
        for (a, t), (re, im) in self.terms.items():
            out = out + ExactScalar.from_phase(PhaseExponent._raw(-a, tuple(-c for c in t)), re, -im)
        return out

    def invertible_here(self) -> bool:
        """True when :meth:`inverse` can represent the inverse (one irrational class)."""
        return len({t for _, t in self.terms}) == 1

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if len(self.terms) == 1:
            ((a, t), (re, im)), = self.terms.items()
            n = re * re + im * im
            return ExactScalar.from_phase(PhaseExponent._raw(-a, tuple(-c for c in t)), re / n, -im / n)
        irr = {t for _, t in self.terms}
        if len(irr) != 1:
            raise ExactDivisionError("cannot invert a sum of independent irrational phase characters")
        (t,) = irr
        from sympy import Poly, QQ, invert, symbols

        group = [(a, re, im) for (a, _), (re, im) in self.terms.items()]
        m, poly = _group_polynomial(group)
        x = symbols("x")
        top = max(poly)
        p = Poly([poly.get(e, 0) for e in range(top, -1, -1)], x, domain=QQ)
        phi = Poly(list(reversed(_cyclotomic(m))), x, domain=QQ)
        inv = invert(p, phi)
        coeffs = list(reversed(inv.all_coeffs()))
        out = ExactScalar({})
        neg_t = tuple(-c for c in t)
        for k, c in enumerate(coeffs):
            c = Fraction(int(c.p), int(c.q))
            if c:
                out = out + ExactScalar.from_phase(PhaseExponent._raw(Fraction(2 * k, m), neg_t), c)
        return out

    # predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        if not self.terms:
            return True
        groups: dict[tuple, list] = {}
        for (a, t), (re, im) in self.terms.items():
            groups.setdefault(t, []).append((a, re, im))
        for group in groups.values():
            if len(group) <= 2:
                # one nonzero term, or two terms whose phases differ by less
                # than a quarter turn: neither can vanish
                return False
            m, poly = _group_polynomial(group)
            if _reduce_mod_cyclotomic(poly, m):
                return False
        return True

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = ExactScalar.coerce(other)
        except (ModeMismatch, TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    def is_gaussian(self) -> bool:
        return all(a == 0 and not t for (a, t) in self.terms)

    def gaussian_parts(self) -> tuple[Fraction, Fraction]:
        if not self.is_gaussian():
            raise ValueError("scalar carries a nontrivial phase")
        if not self.terms:
            return Fraction(0), Fraction(0)
        return next(iter(self.terms.values()))

    def to_complex(self, theta_values: Sequence[float] = ()) -> complex:
        total = 0j
        for (a, t), (re, im) in self.terms.items():
            total += complex(float(re), float(im)) * PhaseExponent._raw(a, t).value(theta_values)
        return total

    def __complex__(self):
        return self.to_complex()

    def sorted_terms(self):
        """Terms in a deterministic order, for serialization."""
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, t), (re, im) in self.sorted_terms():
            c = f"({fraction_text(re)}+{fraction_text(im)}i)"
            if a or t:
                c += "*" + repr(PhaseExponent._raw(a, t))
            parts.append(c)
        return " + ".join(parts)


_ZERO = ExactScalar({})
_ONE = ExactScalar(dict(_UNIT_TERMS))


class ExactField:
    """Arithmetic helpers for exact scalars."""

    exact = True
    name = "exact"
    tol = 0.0

    def zero(self):
        return _ZERO

    def one(self):
        return _ONE

    def coerce(self, x):
        return ExactScalar.coerce(x)

    def is_zero(self, x) -> bool:
        return ExactScalar.coerce(x).is_zero()

    def eq(self, a, b) -> bool:
        return self.is_zero(ExactScalar.coerce(a) - b)

    def inv(self, x):
        return ExactScalar.coerce(x).inverse()

    def conj(self, x):
        return ExactScalar.coerce(x).conjugate()

    def magnitude(self, x) -> float:
        return abs(ExactScalar.coerce(x).to_complex()) if x else 0.0

    def phase(self, phase: PhaseExponent):
        return ExactScalar.from_phase(phase)

    def __repr__(self):
        return "ExactField()"


class NumericField:
    """Arithmetic helpers for complex floating-point scalars with tolerance ``tol``."""

    exact = False
    name = "numeric"

    def __init__(self, tol: float = 1e-12, theta_values: Sequence[float] = ()):
        self.tol = float(tol)
        self.theta_values = tuple(float(t) for t in theta_values)

    def zero(self):
        return 0j

    def one(self):
        return 1 + 0j

    def coerce(self, x):
        if isinstance(x, ExactScalar):
            raise ModeMismatch("exact scalar passed to floating-point arithmetic")
        if isinstance(x, Fraction):
            return complex(float(x))
        return complex(x)

    def is_zero(self, x) -> bool:
        return abs(x) <= self.tol

    def eq(self, a, b) -> bool:
        return abs(a - b) <= self.tol * max(1.0, abs(a), abs(b))

    def inv(self, x):
        if self.is_zero(x):
            raise ZeroDivisionError("inverse of a numerically vanishing scalar")
        return 1 / complex(x)

    def conj(self, x):
        return complex(x).conjugate()

    def magnitude(self, x) -> float:
        return abs(x)

    def phase(self, phase: PhaseExponent):
        return phase.value(self.theta_values)

    def __repr__(self):
        return f"NumericField(tol={self.tol!r})"


EXACT = ExactField()


def field_for(mode: str, tol: float = 1e-12, theta_values: Sequence[float] = ()):
    if mode == "exact":
        return EXACT
    if mode == "numeric":
        return NumericField(tol, theta_values)
    raise ValueError(f"unknown scalar mode {mode!r}")
