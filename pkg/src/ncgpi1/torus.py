"""Noncommutative tori: Weyl elements, truncated forms, lattice invariants.

A torus is presented by a skew-symmetric matrix Theta whose entries lie in
Q + Q*theta_1 + ... + Q*theta_k for declared, rationally independent
irrationals theta_j.  Weyl elements multiply as
``u^r u^s = exp(i*pi*r^T Theta s) u^{r+s}``; the phase is kept exactly as a
:class:`PhaseExponent`.

The forms algebra is spanned by ``u^r eta_I`` with ``|r|_inf <= R``, where the
``eta_k = u_k^{-1} du_k`` are central, anticommute among themselves and
satisfy ``d(u^r) = u^r * sum_k r_k eta_k``.

The lattice ``Lambda = {r : Theta r integral}`` is found as an integer kernel;
its rank m gives the fundamental-group descriptor ``hull of Z^m x R^(n-m)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .algebra import OUT_OF_WINDOW, GradedBasisAlgebra, OutOfWindow
from .builders import subset_sign, wedge_name
from .center import graded_center
from .connections import FgpConnection, FgpModule, curvature
from .errors import InvalidInput
from .lattice import completion_rows, hnf, integer_kernel, solve_in_lattice
from .linalg import same_span
from .matrices import AlgMatrix
from .scalars import EXACT, PhaseExponent, fraction_text, to_fraction

FORMAT_VERSION = "1.0"


class Inconclusive(RuntimeError):
    """The truncation window is too small to decide the question."""


class NonCommutingEndos(ValueError):
    pass


class NotInNormalForm(ValueError):
    """kappa has non-constant or non-central components."""


class NotFlat(ValueError):
    pass


@dataclass(frozen=True)
class ThetaEntry:
    """``rational + sum_j irrational[j] * theta_{j+1}``."""

    rational: Fraction = Fraction(0)
    irrational: tuple = ()

    @classmethod
    def make(cls, rational=0, irrational: Sequence = ()) -> "ThetaEntry":
        irr = [to_fraction(c) for c in irrational]
        while irr and irr[-1] == 0:
            irr.pop()
        return cls(to_fraction(rational), tuple(irr))

    def __add__(self, other: "ThetaEntry") -> "ThetaEntry":
        k = max(len(self.irrational), len(other.irrational))
        a = self.irrational + (Fraction(0),) * (k - len(self.irrational))
        b = other.irrational + (Fraction(0),) * (k - len(other.irrational))
        return ThetaEntry.make(self.rational + other.rational, [x + y for x, y in zip(a, b)])

    def __neg__(self) -> "ThetaEntry":
        return ThetaEntry.make(-self.rational, [-c for c in self.irrational])

    def scale(self, c) -> "ThetaEntry":
        c = to_fraction(c)
        return ThetaEntry.make(self.rational * c, [x * c for x in self.irrational])

    def is_zero(self) -> bool:
        return self.rational == 0 and not self.irrational

    def is_integer(self) -> bool:
        return not self.irrational and self.rational.denominator == 1

    def value(self, theta_values: Sequence[float] = ()) -> float:
        return float(self.rational) + sum(float(c) * t for c, t in zip(self.irrational, theta_values))

    def to_dict(self, names: Sequence[str]) -> dict:
        irr = {names[j]: fraction_text(c) for j, c in enumerate(self.irrational) if c}
        return {"rational": fraction_text(self.rational), "irrational": irr}


def _dot(r: Sequence[int], entries: Sequence[ThetaEntry]) -> ThetaEntry:
    out = ThetaEntry()
    for a, e in zip(r, entries):
        if a:
            out = out + e.scale(a)
    return out


@dataclass(frozen=True)
class TorusPresentation:
    n: int
    theta: tuple                                   # n x n tuple of ThetaEntry
    radius: int = 3
    generators: tuple = ()                         # names of declared irrationals
    theta_values: tuple = ()                       # numeric bindings, used only for export

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise InvalidInput("dimension must be positive", "n")
        if len(self.theta) != n or any(len(row) != n for row in self.theta):
            raise InvalidInput(f"Theta must be {n}x{n}", "theta")
        if self.radius < 0:
            raise InvalidInput("radius must be nonnegative", "radius")
        for i in range(n):
            for j in range(n):
                e = self.theta[i][j]
                if len(e.irrational) > len(self.generators):
                    raise InvalidInput("coefficient of an undeclared irrational", f"theta[{i}][{j}]")
                if not (e + self.theta[j][i]).is_zero():
                    raise InvalidInput("Theta is not skew-symmetric", f"theta[{i}][{j}]")

    # construction --------------------------------------------------------------
    @classmethod
    def from_matrix(cls, entries, radius: int = 3, generators: Sequence[str] = (),
                    theta_values: Sequence[float] = ()) -> "TorusPresentation":
        """Entries may be ThetaEntry, rationals, or (rational, [irrational coefficients]) pairs."""
        rows = []
        for row in entries:
            out = []
            for e in row:
                if isinstance(e, ThetaEntry):
                    out.append(e)
                elif isinstance(e, tuple):
                    out.append(ThetaEntry.make(e[0], e[1]))
                else:
                    out.append(ThetaEntry.make(e))
            rows.append(tuple(out))
        return cls(len(rows), tuple(rows), int(radius), tuple(generators), tuple(float(t) for t in theta_values))

    @classmethod
    def rational_2d(cls, theta, radius: int = 3) -> "TorusPresentation":
        t = to_fraction(theta)
        return cls.from_matrix([[0, t], [-t, 0]], radius)

    @classmethod
    def irrational_2d(cls, radius: int = 3, value: float = 2 ** 0.5 - 1) -> "TorusPresentation":
        """Theta_12 = theta_1 for one declared irrational generator."""
        return cls.from_matrix([[0, (0, [1])], [(0, [-1]), 0]], radius, ("theta1",), (value,))

    # arithmetic ----------------------------------------------------------------
    def theta_times(self, r: Sequence[int]) -> list[ThetaEntry]:
        """The vector ``Theta r``."""
        return [_dot(r, row) for row in self.theta]

    def bilinear(self, r: Sequence[int], s: Sequence[int]) -> ThetaEntry:
        """``r^T Theta s``."""
        return _dot(r, self.theta_times(s))

    def cocycle(self, r: Sequence[int], s: Sequence[int]) -> PhaseExponent:
        """Exponent of ``tau(r, s) = exp(i*pi*r^T Theta s)``."""
        e = self.bilinear(r, s)
        return PhaseExponent(e.rational, e.irrational)

    def in_window(self, r: Sequence[int], radius: int | None = None) -> bool:
        R = self.radius if radius is None else radius
        return all(abs(int(v)) <= R for v in r)

    def window(self, radius: int | None = None) -> list[tuple]:
        R = self.radius if radius is None else radius
        return list(itertools.product(range(-R, R + 1), repeat=self.n))

    def conjugated(self, U) -> "TorusPresentation":
        """The presentation ``U^T Theta U`` for an integer matrix ``U``."""
        U = [[int(v) for v in row] for row in U]
        n = self.n
        cols = [[U[i][j] for i in range(n)] for j in range(n)]
        entries = [[self.bilinear(cols[a], cols[b]) for b in range(n)] for a in range(n)]
        return TorusPresentation(n, tuple(tuple(r) for r in entries), self.radius, self.generators,
                                 self.theta_values)

    # serialization -------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "theta": [[e.to_dict(self.generators) for e in row] for row in self.theta],
            "radius": self.radius,
            "irrational_generators": list(self.generators),
            "theta_values": list(self.theta_values),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TorusPresentation":
        from .algebra_io import check_version, reject_unknown

        if not isinstance(data, dict):
            raise InvalidInput("torus description must be an object")
        reject_unknown(data, {"format_version", "n", "theta", "radius", "irrational_generators", "theta_values"}, "")
        check_version(data)
        for key in ("n", "theta"):
            if key not in data:
                raise InvalidInput("missing field", key)
        gens = list(data.get("irrational_generators", []))
        if len(set(gens)) != len(gens) or not all(isinstance(g, str) for g in gens):
            raise InvalidInput("generator names must be distinct strings", "irrational_generators")
        pos = {g: j for j, g in enumerate(gens)}
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise InvalidInput("must be an integer", "n")
        rows = []
        theta = data["theta"]
        if not isinstance(theta, list) or len(theta) != n:
            raise InvalidInput(f"expected {n} rows", "theta")
        for i, row in enumerate(theta):
            if not isinstance(row, list) or len(row) != n:
                raise InvalidInput(f"expected {n} entries", f"theta[{i}]")
            out = []
            for j, e in enumerate(row):
                path = f"theta[{i}][{j}]"
                if not isinstance(e, dict):
                    try:
                        out.append(ThetaEntry.make(e))
                        continue
                    except (TypeError, ValueError, ZeroDivisionError):
                        raise InvalidInput("entry must be a rational or an object", path) from None
                reject_unknown(e, {"rational", "irrational"}, path)
                irr = [Fraction(0)] * len(gens)
                for name, c in dict(e.get("irrational", {})).items():
                    if name not in pos:
                        raise InvalidInput(f"undeclared irrational generator {name!r}", f"{path}.irrational")
                    try:
                        irr[pos[name]] = to_fraction(c)
                    except (TypeError, ValueError, ZeroDivisionError):
                        raise InvalidInput("bad rational", f"{path}.irrational.{name}") from None
                try:
                    rat = to_fraction(e.get("rational", 0))
                except (TypeError, ValueError, ZeroDivisionError):
                    raise InvalidInput("bad rational", f"{path}.rational") from None
                out.append(ThetaEntry.make(rat, irr))
            rows.append(tuple(out))
        vals = data.get("theta_values", [])
        if len(vals) not in (0, len(gens)):
            raise InvalidInput("one value per irrational generator", "theta_values")
        radius = data.get("radius", 3)
        if not isinstance(radius, int) or isinstance(radius, bool):
            raise InvalidInput("must be an integer", "radius")
        return cls(n, tuple(rows), radius, tuple(gens), tuple(float(v) for v in vals))


@dataclass(frozen=True)
class WeylElement:
    """``coefficient * exp(i*pi*phase) * u^exponent``."""

    exponent: tuple
    coefficient: object = 1
    phase: PhaseExponent = field(default_factory=PhaseExponent)

    def scalar(self, field=EXACT, theta_values: Sequence[float] = ()):
        if field.exact:
            return field.coerce(self.coefficient) * field.phase(self.phase)
        return field.coerce(self.coefficient) * self.phase.value(theta_values)


def weyl(r: Sequence[int], coefficient=1) -> WeylElement:
    return WeylElement(tuple(int(v) for v in r), coefficient, PhaseExponent())


def weyl_mul(a: WeylElement, b: WeylElement, T: TorusPresentation, policy: str = "strict"):
    """``u^r u^s = tau(r, s) u^{r+s}``; returns None when dropped outside the window."""
    r, s = a.exponent, b.exponent
    t = tuple(x + y for x, y in zip(r, s))
    if not T.in_window(t):
        if policy == "drop":
            return None
        raise OutOfWindow(f"u^{list(t)} leaves the window |r| <= {T.radius}")
    return WeylElement(t, a.coefficient * b.coefficient, a.phase + b.phase + T.cocycle(r, s))


# --- forms ----------------------------------------------------------------------

def _weyl_name(r: tuple, I: tuple) -> str:
    if not any(r):
        return wedge_name(I)
    u = "u[" + ",".join(str(v) for v in r) + "]"
    return u if not I else u + "*" + wedge_name(I)


def torus_forms(T: TorusPresentation, D_max: int | None = None, field=EXACT, truncation: str = "strict",
                radius: int | None = None) -> GradedBasisAlgebra:
    """Truncated forms ``u^r eta_I`` with ``|r|_inf <= R`` and ``|I| <= D_max``.

    Products multiply Weyl parts with the cocycle phase and wedge the
    central ``eta`` parts.  The star follows the Koszul-signed convention
    with anti-self-adjoint ``eta_k``, so ``(u^r eta_I)* = (-1)^{|I|} u^{-r} eta_I``.
    In numeric mode the irrational generators take ``T.theta_values``.
    """
    n = T.n
    R = T.radius if radius is None else radius
    top = n if D_max is None else min(int(D_max), n)
    subsets = [I for k in range(top + 1) for I in itertools.combinations(range(1, n + 1), k)]
    window = T.window(R)
    keys = [(r, I) for I in subsets for r in window]
    pos = {k: i for i, k in enumerate(keys)}
    basis = [(_weyl_name(r, I), len(I)) for r, I in keys]
    theta_values = T.theta_values

    def phase(p: PhaseExponent):
        return field.phase(p) if field.exact else p.value(theta_values)

    def product(i, j):
        (r, I), (s, J) = keys[i], keys[j]
        sg = subset_sign(I, J)
        if sg == 0:
            return {}
        t = tuple(x + y for x, y in zip(r, s))
        if len(I) + len(J) > top or not T.in_window(t, R):
            return OUT_OF_WINDOW
        return {pos[(t, tuple(sorted(I + J)))]: phase(T.cocycle(r, s)) * sg}

    def differential(i):
        r, I = keys[i]
        out = {}
        for k in range(1, n + 1):
            c = r[k - 1]
            sg = subset_sign((k,), I)
            if c and sg:
                if len(I) + 1 > top:
                    return OUT_OF_WINDOW
                out[pos[(r, tuple(sorted((k,) + I)))]] = c * sg
        return out

    def star(i):
        r, I = keys[i]
        return {pos[(tuple(-v for v in r), I)]: (-1) ** len(I)}

    return GradedBasisAlgebra(basis, product, differential, unit={pos[((0,) * n, ())]: 1}, star=star,
                              max_degree=top, field=field, truncation=truncation, complete=False,
                              name=f"torus_forms(n={n}, R={R})", star_convention="koszul",
                              metadata={"builder": "torus", "keys": keys, "radius": R, "n": n,
                                        "irrational_generators": tuple(T.generators)})


def weyl_form(A: GradedBasisAlgebra, r: Sequence[int], I: Sequence[int] = (), coefficient=1):
    """The element ``coefficient * u^r eta_I`` of a torus forms algebra."""
    key = (tuple(int(v) for v in r), tuple(sorted(I)))
    keys = A.metadata["keys"]
    return A.element({keys.index(key): coefficient})


# --- lattice invariants -----------------------------------------------------------

@dataclass(frozen=True)
class LatticeData:
    n: int
    basis: tuple                      # m rows, Hermite normal form
    completion: tuple                 # n - m rows extending to a Q-basis of Q^n

    @property
    def m(self) -> int:
        return len(self.basis)

    def contains(self, r: Sequence[int]) -> bool:
        return solve_in_lattice(self.basis, r) is not None

    def to_dict(self) -> dict:
        return {"m": self.m, "basis": [list(b) for b in self.basis], "completion": [list(c) for c in self.completion]}


def _constraint_rows(T: TorusPresentation) -> list[list[int]]:
    """Integer system in variables (r, z) whose solutions are Theta r = z integral."""
    n = T.n
    rows = []
    L = 1
    for row in T.theta:
        for e in row:
            L = lcm(L, e.rational.denominator)
    for i, row in enumerate(T.theta):
        rat = [int(e.rational * L) for e in row]
        rows.append(rat + [-L * int(i == j) for j in range(n)])
        for g in range(len(T.generators)):
            coeffs = [e.irrational[g] if g < len(e.irrational) else Fraction(0) for e in row]
            if any(coeffs):
                den = lcm(*(c.denominator for c in coeffs))
                rows.append([int(c * den) for c in coeffs] + [0] * n)
    return rows


def lattice_Lambda(T: TorusPresentation) -> LatticeData:
    """``Lambda = {r in Z^n : Theta r in Z^n}`` with a Hermite-normal-form basis."""
    n = T.n
    kernel = integer_kernel(_constraint_rows(T), 2 * n)
    H = hnf([k[:n] for k in kernel]) if kernel else []
    for r in H:
        if not all(e.is_integer() for e in T.theta_times(r)):
            raise AssertionError(f"lattice row {r} fails the integrality condition")
    return LatticeData(n, tuple(tuple(r) for r in H), tuple(tuple(c) for c in completion_rows(H, n)))


@dataclass(frozen=True)
class GammaData:
    """The subgroup of T^n annihilating Lambda: ``(+) Z/d_i  x  T^(n-m)``."""

    invariant_factors: tuple
    torus_dimension: int

    @property
    def finite_part(self) -> tuple:
        return tuple(d for d in self.invariant_factors if d != 1)

    @property
    def order(self) -> int | None:
        if self.torus_dimension:
            return None
        out = 1
        for d in self.finite_part:
            out *= d
        return out

    @property
    def text(self) -> str:
        parts = []
        fin = self.finite_part
        for d in sorted(set(fin)):
            c = fin.count(d)
            parts.append(f"(Z/{d})^{c}" if c > 1 else f"Z/{d}")
        if self.torus_dimension:
            parts.append(f"T^{self.torus_dimension}")
        return " x ".join(parts) if parts else "trivial"


def gamma_subgroup(L: LatticeData) -> GammaData:
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors

    if L.m == 0:
        return GammaData((), L.n)
    facs = invariant_factors(Matrix([list(b) for b in L.basis]), domain=ZZ)
    return GammaData(tuple(int(abs(d)) for d in facs), L.n - L.m)


_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def _power(base: str, k: int, ascii: bool) -> str:
    return f"{base}^{k}" if ascii else base + str(k).translate(_SUPERSCRIPT)


@dataclass(frozen=True)
class Pi1Descriptor:
    n: int
    lattice: LatticeData
    gamma: GammaData

    @property
    def m(self) -> int:
        return self.lattice.m

    @property
    def n_minus_m(self) -> int:
        return self.n - self.m

    def hull_text(self, ascii: bool = False) -> str:
        parts = []
        if self.m:
            parts.append(_power("Z", self.m, ascii))
        if self.n_minus_m:
            parts.append(_power("R", self.n_minus_m, ascii))
        return "algebraic hull of " + (" x " if ascii else " × ").join(parts)

    def generator_text(self, ascii: bool = False) -> str:
        zn = _power("Z", self.n, ascii)
        return f"algebraic hull of {zn} + {'Theta' if ascii else 'Θ'}{zn}"

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n_minus_m": self.n_minus_m,
            "lattice_basis": [list(b) for b in self.lattice.basis],
            "lattice_completion": [list(c) for c in self.lattice.completion],
            "gamma_invariant_factors": list(self.gamma.invariant_factors),
            "gamma_text": self.gamma.text,
            "descriptor_text": self.hull_text(),
            "descriptor_ascii": self.hull_text(ascii=True),
            "generator_text": self.generator_text(),
        }


def pi1_descriptor(T: TorusPresentation) -> Pi1Descriptor:
    L = lattice_Lambda(T)
    return Pi1Descriptor(T.n, L, gamma_subgroup(L))


def brute_force_lattice(T: TorusPresentation, bound: int) -> list[tuple]:
    """All r with ``|r|_inf <= bound`` and Theta r integral (enumeration, for cross-checks)."""
    return [r for r in T.window(bound) if all(e.is_integer() for e in T.theta_times(r))]


# --- center cross-check -----------------------------------------------------------

@dataclass
class CenterCrosscheck:
    radius: int
    interior_radius: int
    lattice: LatticeData
    predicted: dict          # degree -> list of (r, I)
    computed_dims: dict      # degree -> int
    agree: dict              # degree -> bool

    @property
    def passed(self) -> bool:
        return all(self.agree.values())

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "interior_radius": self.interior_radius,
            "lattice_basis": [list(b) for b in self.lattice.basis],
            "degrees": {str(k): {"predicted_dim": len(self.predicted[k]), "computed_dim": self.computed_dims[k],
                                 "pass": self.agree[k]} for k in sorted(self.predicted)},
            "pass": self.passed,
        }


def center_crosscheck(T: TorusPresentation, R: int | None = None, D_max: int | None = None,
                      degrees: Sequence[int] = (0, 1)) -> CenterCrosscheck:
    """Commutant of the generators ``u^{+-e_k}, eta_k`` versus the lattice prediction.

    The prediction in degree k is the span of ``u^r eta_I`` with ``r`` in
    Lambda, ``|r|_inf <= R - 1`` and ``|I| = k``.  The forms are built up to
    ``D_max`` (default n); a degree k < n is only decidable when
    ``D_max >= k + 1``, since its commutators with the ``eta_l`` land in
    degree k + 1.
    """
    R = T.radius if R is None else int(R)
    inner = R - 1
    L = lattice_Lambda(T)
    if inner < 0 or any(not T.in_window(b, inner) for b in L.basis):
        raise Inconclusive(f"interior window |r| <= {inner} does not contain a basis of Lambda")
    top = T.n if D_max is None else min(int(D_max), T.n)
    for k in degrees:
        if k > top or (k < T.n and k + 1 > top):
            raise Inconclusive(f"degree {k} needs forms up to degree {min(k + 1, T.n)}")
    A = torus_forms(T, top, radius=R)
    gens = []
    for k in range(T.n):
        e = [0] * T.n
        e[k] = 1
        gens.append(weyl_form(A, e))
        gens.append(weyl_form(A, [-v for v in e]))
        gens.append(weyl_form(A, [0] * T.n, (k + 1,)))
    Z = graded_center(A, gens, degrees=list(degrees))
    keys = A.metadata["keys"]
    lam = [r for r in T.window(inner) if L.contains(r)]
    predicted, dims, agree = {}, {}, {}
    for k in degrees:
        subs = list(itertools.combinations(range(1, T.n + 1), k))
        pred = [(r, I) for I in subs for r in lam]
        predicted[k] = pred
        dims[k] = len(Z.elements.get(k, []))
        pvecs = [{keys.index(key): EXACT.one()} for key in pred]
        cvecs = [dict(z.coords) for z in Z.elements.get(k, [])]
        agree[k] = len(pvecs) == len(cvecs) and same_span(pvecs, cvecs, EXACT)
    return CenterCrosscheck(R, inner, L, predicted, dims, agree)


# --- flat connections and commuting endomorphisms -----------------------------------

def _commutes(X, Y, exact: bool, tol: float) -> bool:
    C = X @ Y - Y @ X
    if exact:
        return all(EXACT.is_zero(v) for v in np.asarray(C, dtype=object).flat)
    return float(np.max(np.abs(C), initial=0.0)) <= tol


def connection_from_endos(endos: Sequence, T: TorusPresentation, A: GradedBasisAlgebra | None = None,
                          force: bool = False, tol: float = 1e-10) -> FgpConnection:
    """The connection ``d + sum_k endo_k eta_k`` on the free module of rank k.

    Commuting endomorphisms give a flat connection (checked).  With
    ``force=True`` non-commuting ones are accepted and the result is not flat.
    """
    if A is None:
        A = torus_forms(T, T.n, radius=1)
    f = A.field
    if len(endos) != T.n:
        raise ValueError(f"need {T.n} endomorphisms, got {len(endos)}")
    mats = [np.asarray(E, dtype=object if f.exact else complex) for E in endos]
    k = mats[0].shape[0]
    if f.exact:
        mats = [np.vectorize(f.coerce, otypes=[object])(M) for M in mats]
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            if not force and not _commutes(mats[a], mats[b], f.exact, tol):
                raise NonCommutingEndos(f"endomorphisms {a + 1} and {b + 1} do not commute")
    kappa = AlgMatrix.zeros(A, k, k)
    zero = (0,) * T.n
    for j, M in enumerate(mats):
        eta = weyl_form(A, zero, (j + 1,))
        idx = next(iter(eta.coords))
        kappa.data[:, :, idx] = kappa.data[:, :, idx] + M
    C = FgpConnection(FgpModule.free(A, k), kappa)
    if not force and not curvature(C).matrix.is_zero(tol if not f.exact else None):
        raise NotFlat("commuting endomorphisms produced a curved connection")
    return C


def endos_from_connection(C: FgpConnection, tol: float = 1e-10) -> list[np.ndarray]:
    """Constant matrices ``A_k`` with ``kappa = sum_k A_k eta_k`` on a free torus module."""
    A = C.algebra
    if A.metadata.get("builder") != "torus":
        raise ValueError("connection is not over a torus forms algebra")
    if not C.module.is_free:
        raise NotInNormalForm("module is not free")
    n = A.metadata["n"]
    keys = A.metadata["keys"]
    zero = (0,) * n
    allowed = {keys.index((zero, (k,))): k for k in range(1, n + 1)}
    for idx in C.kappa.support():
        if idx not in allowed:
            raise NotInNormalForm(f"kappa has a component along {A.names[idx]}")
    if not curvature(C).matrix.is_zero(None if A.field.exact else tol):
        raise NotFlat("connection is not flat")
    out = []
    for idx in sorted(allowed, key=allowed.get):
        out.append(C.kappa.data[:, :, idx].copy())
    return out
