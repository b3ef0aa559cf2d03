"""Truncated differential graded algebras given by a graded basis.

An algebra is described by its basis (names and degrees), structure constants
for products of basis elements, the differential on basis elements and an
optional antilinear star.  The star satisfies ``d(a*) = (da)*`` and either
``(ab)* = b* a*`` (``star_convention="plain"``) or the Koszul-signed
``(ab)* = (-1)^{|a||b|} b* a*`` (``"koszul"``, the rule obeyed by complex
conjugation of ordinary differential forms).  Products and differentials may be supplied as
tables or as rules evaluated lazily; either way results are cached.

Algebras come in two flavours.  A *complete* algebra has nothing above
``max_degree`` (exterior algebras, for example), so products landing above the
top degree are genuinely zero.  A *truncated* algebra is a finite window onto
an infinite one: a product whose result is not represented in the window is
``OUT_OF_WINDOW``.  Multiplication raises :class:`OutOfWindow` on such
products under the ``"strict"`` policy and silently drops them under
``"drop"``.  Axiom checks simply skip tuples that leave the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .checks import CheckReport, CheckResult
from .scalars import EXACT


class OutOfWindow(ArithmeticError):
    """A product or differential left the represented degree/weight window."""


class _OutOfWindowMarker:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OUT_OF_WINDOW"

    def __reduce__(self):
        return (_OutOfWindowMarker, ())


OUT_OF_WINDOW = _OutOfWindowMarker()


@dataclass(frozen=True)
class BasisElement:
    name: str
    degree: int


Coords = dict  # basis index -> scalar


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


class GradedBasisAlgebra:
    def __init__(
        self,
        basis: Sequence,
        product,
        differential=None,
        unit: Mapping | None = None,
        star=None,
        *,
        max_degree: int | None = None,
        field=EXACT,
        truncation: str = "strict",
        complete: bool = False,
        name: str = "algebra",
        metadata: dict | None = None,
        star_convention: str = "plain",
    ):
        self.basis = tuple(b if isinstance(b, BasisElement) else BasisElement(str(b[0]), int(b[1]))
                           for b in basis)
        if not self.basis:
            raise ValueError("an algebra needs a nonempty basis")
        self.names = tuple(b.name for b in self.basis)
        if len(set(self.names)) != len(self.names):
            raise ValueError("basis names must be unique")
        self._index = {n: i for i, n in enumerate(self.names)}
        self.degrees = np.array([b.degree for b in self.basis], dtype=int)
        if self.degrees.min() < 0:
            raise ValueError("degrees must be nonnegative")
        self.max_degree = int(self.degrees.max() if max_degree is None else max_degree)
        if self.degrees.max() > self.max_degree:
            raise ValueError("basis element above max_degree")
        if truncation not in ("strict", "drop"):
            raise ValueError("truncation must be 'strict' or 'drop'")
        if star_convention not in ("plain", "koszul"):
            raise ValueError("star_convention must be 'plain' or 'koszul'")
        self.star_convention = star_convention
        self.field = field
        self.truncation = truncation
        self.complete = bool(complete)
        self.name = name
        self.metadata = dict(metadata or {})
        self._by_degree = {k: tuple(int(i) for i in np.flatnonzero(self.degrees == k))
                           for k in range(self.max_degree + 1)}

        self._product_rule = self._as_rule(product, self._default_product)
        self._d_rule = self._as_rule(differential or {}, self._default_d)
        self._star_rule = None if star is None else self._as_rule(star, lambda i: None)
        self._prod_cache: dict = {}
        self._d_cache: dict = {}
        self._star_cache: dict = {}
        if unit is None:
            if "1" not in self._index:
                raise ValueError("unit coordinates required (no basis element named '1')")
            unit = {"1": 1}
        self._unit = self._coords(unit)

    # --- construction helpers -------------------------------------------------
    def _as_rule(self, spec, default: Callable):
        if callable(spec):
            return spec
        table = {}
        for key, value in dict(spec).items():
            k = tuple(self.index(x) for x in key) if isinstance(key, tuple) else self.index(key)
            table[k] = value

        def rule(*key):
            k = key if len(key) > 1 else key[0]
            if k in table:
                return table[k]
            return default(*key)

        return rule

    def _default_product(self, i, j):
        if self.complete or self.degrees[i] + self.degrees[j] <= self.max_degree:
            return {}
        return OUT_OF_WINDOW

    def _default_d(self, i):
        if self.complete or self.degrees[i] + 1 <= self.max_degree:
            return {}
        return OUT_OF_WINDOW

    def _coords(self, data) -> Coords:
        """Normalize a coordinate mapping (names or indices) to index -> scalar."""
        if isinstance(data, AlgebraElement):
            return dict(data.coords)
        f = self.field
        out: Coords = {}
        items = data.items() if isinstance(data, Mapping) else data
        for key, val in items:
            i = self.index(key)
            v = f.coerce(val)
            v = out[i] + v if i in out else v
            if f.is_zero(v):
                out.pop(i, None)
            else:
                out[i] = v
        return out

    # --- basic queries --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, key) -> int:
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < len(self.basis):
                raise IndexError(key)
            return int(key)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"unknown basis element {key!r}") from None

    def degree_of(self, i) -> int:
        return int(self.degrees[self.index(i)])

    def basis_of_degree(self, k: int) -> tuple[int, ...]:
        return self._by_degree.get(k, ())

    def degree_dims(self) -> list[int]:
        return [len(self.basis_of_degree(k)) for k in range(self.max_degree + 1)]

    @property
    def has_star(self) -> bool:
        return self._star_rule is not None

    def product_coords(self, i: int, j: int):
        key = (i, j)
        try:
            return self._prod_cache[key]
        except KeyError:
            pass
        raw = self._product_rule(i, j)
        val = OUT_OF_WINDOW if raw is OUT_OF_WINDOW else self._coords(raw)
        self._prod_cache[key] = val
        return val

    def d_coords(self, i: int):
        try:
            return self._d_cache[i]
        except KeyError:
            pass
        raw = self._d_rule(i)
        val = OUT_OF_WINDOW if raw is OUT_OF_WINDOW else self._coords(raw)
        self._d_cache[i] = val
        return val

    def star_coords(self, i: int) -> Coords:
        if self._star_rule is None:
            raise NoStar(f"algebra {self.name!r} has no star")
        try:
            return self._star_cache[i]
        except KeyError:
            pass
        raw = self._star_rule(i)
        if raw is None:
            raise NoStar(f"star undefined on basis element {self.names[i]!r}")
        val = self._coords(raw)
        self._star_cache[i] = val
        return val

    # --- elements -------------------------------------------------------------
    def element(self, coords=None) -> "AlgebraElement":
        return AlgebraElement(self, self._coords(coords or {}))

    def __call__(self, name) -> "AlgebraElement":
        """The basis element with the given name (or index)."""
        return AlgebraElement(self, {self.index(name): self.field.one()})

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    def one(self) -> "AlgebraElement":
        return AlgebraElement(self, dict(self._unit))

    def scalar(self, c) -> "AlgebraElement":
        return self.one() * c

    def mul_coords(self, x: Coords, y: Coords, policy: str | None = None) -> Coords:
        policy = policy or self.truncation
        f = self.field
        out: Coords = {}
        for i, a in x.items():
            for j, b in y.items():
                prod = self.product_coords(i, j)
                if prod is OUT_OF_WINDOW:
                    if policy == "strict":
                        raise OutOfWindow(f"{self.names[i]} * {self.names[j]} leaves the window")
                    continue
                ab = a * b
                for k, c in prod.items():
                    out[k] = out[k] + ab * c if k in out else ab * c
        return {k: v for k, v in out.items() if not f.is_zero(v)}

    def d_of_coords(self, x: Coords, policy: str | None = None) -> Coords:
        policy = policy or self.truncation
        f = self.field
        out: Coords = {}
        for i, a in x.items():
            img = self.d_coords(i)
            if img is OUT_OF_WINDOW:
                if policy == "strict":
                    raise OutOfWindow(f"d({self.names[i]}) leaves the window")
                continue
            for k, c in img.items():
                out[k] = out[k] + a * c if k in out else a * c
        return {k: v for k, v in out.items() if not f.is_zero(v)}

    def star_of_coords(self, x: Coords) -> Coords:
        f = self.field
        out: Coords = {}
        for i, a in x.items():
            ca = f.conj(a)
            for k, c in self.star_coords(i).items():
                out[k] = out[k] + ca * c if k in out else ca * c
        return {k: v for k, v in out.items() if not f.is_zero(v)}

    def with_truncation(self, truncation: str) -> "GradedBasisAlgebra":
        """Same algebra (sharing caches) with another out-of-window policy."""
        clone = object.__new__(GradedBasisAlgebra)
        clone.__dict__.update(self.__dict__)
        if truncation not in ("strict", "drop"):
            raise ValueError("truncation must be 'strict' or 'drop'")
        clone.truncation = truncation
        return clone

    def __repr__(self):
        kind = "complete" if self.complete else "truncated"
        return f"GradedBasisAlgebra({self.name!r}, dims={self.degree_dims()}, {kind}, {self.field!r})"


class NoStar(ValueError):
    """An operation needed a star but the algebra has none."""


class AlgebraElement:
    """Sparse linear combination of basis elements."""

    __slots__ = ("algebra", "coords")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, algebra: GradedBasisAlgebra, coords: Coords):
        self.algebra = algebra
        self.coords = coords

    def _same(self, other: "AlgebraElement"):
        if other.algebra is not self.algebra and other.algebra.names != self.algebra.names:
            raise ValueError("elements of different algebras")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = self.algebra.scalar(other)
        self._same(other)
        f = self.algebra.field
        out = dict(self.coords)
        for k, v in other.coords.items():
            s = out[k] + v if k in out else v
            if f.is_zero(s):
                out.pop(k, None)
            else:
                out[k] = s
        return AlgebraElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.algebra, {k: -v for k, v in self.coords.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._same(other)
            return AlgebraElement(self.algebra, self.algebra.mul_coords(self.coords, other.coords))
        f = self.algebra.field
        c = f.coerce(other)
        out = {k: v * c for k, v in self.coords.items()}
        return AlgebraElement(self.algebra, {k: v for k, v in out.items() if not f.is_zero(v)})

    def __rmul__(self, other):
        # scalars commute with everything
        return self * other

    def mul(self, other: "AlgebraElement", policy: str | None = None) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.algebra.mul_coords(self.coords, other.coords, policy))

    def d(self, policy: str | None = None) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.algebra.d_of_coords(self.coords, policy))

    def star(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.algebra.star_of_coords(self.coords))

    def is_zero(self) -> bool:
        f = self.algebra.field
        return all(f.is_zero(v) for v in self.coords.values())

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            try:
                other = self.algebra.scalar(other)
            except Exception:
                return NotImplemented
        return (self - other).is_zero()

    def degrees(self) -> set[int]:
        return {int(self.algebra.degrees[i]) for i in self.coords}

    @property
    def degree(self) -> int | None:
        """Degree if homogeneous (zero counts as degree 0), else None."""
        degs = self.degrees()
        if not degs:
            return 0
        return degs.pop() if len(degs) == 1 else None

    def component(self, k: int) -> "AlgebraElement":
        return AlgebraElement(self.algebra, {i: v for i, v in self.coords.items()
                                             if self.algebra.degrees[i] == k})

    def coefficient(self, key):
        return self.coords.get(self.algebra.index(key), self.algebra.field.zero())

    def max_abs(self) -> float:
        f = self.algebra.field
        return max((f.magnitude(v) for v in self.coords.values()), default=0.0)

    def __repr__(self):
        if not self.coords:
            return "0"
        names = self.algebra.names
        return " + ".join(f"({v!r})*{names[i]}" for i, v in sorted(self.coords.items()))


def graded_commutator(x: AlgebraElement, y: AlgebraElement, policy: str | None = None) -> AlgebraElement:
    """``[x, y] = xy - (-1)^{|x||y|} yx``, extended bilinearly over homogeneous parts."""
    A = x.algebra
    out = A.zero()
    for p in sorted(x.degrees()):
        xp = x.component(p)
        for q in sorted(y.degrees()):
            yq = y.component(q)
            term = xp.mul(yq, policy) - yq.mul(xp, policy) * _sign(p * q)
            out = out + term
    return out


def _names(A, *idx) -> list[str]:
    return [A.names[i] for i in idx]


def _residual(A, coords: Coords) -> tuple[bool, float]:
    f = A.field
    bad = {k: v for k, v in coords.items() if not f.is_zero(v)}
    mag = max((f.magnitude(v) for v in coords.values()), default=0.0)
    return (not bad), mag


def _sub(A, x: Coords, y: Coords) -> Coords:
    out = dict(x)
    for k, v in y.items():
        out[k] = out[k] - v if k in out else -v
    return out


def _scale(x: Coords, c) -> Coords:
    return {k: v * c for k, v in x.items()}


def check_dga_axioms(A: GradedBasisAlgebra) -> CheckReport:
    """Verify the dga axioms on every in-window basis tuple.

    Tuples whose evaluation leaves the window are skipped.  Each failing axiom
    records the first violating basis tuple (by index order) as its witness.
    """
    report = CheckReport(subject=A.name)
    n = A.dim
    deg = A.degrees
    strict = "strict"

    def attempt(fn):
        try:
            return fn()
        except OutOfWindow:
            return None

    # degree rules
    witness, checked = None, 0
    for i in range(n):
        img = A.d_coords(i)
        if img is not OUT_OF_WINDOW:
            checked += 1
            wrong = [k for k in img if deg[k] != deg[i] + 1]
            if wrong and witness is None:
                witness = {"tuple": _names(A, i), "rule": "d raises degree by one"}
        for j in range(n):
            prod = A.product_coords(i, j)
            if prod is OUT_OF_WINDOW:
                continue
            checked += 1
            if any(deg[k] != deg[i] + deg[j] for k in prod) and witness is None:
                witness = {"tuple": _names(A, i, j), "rule": "degrees add under products"}
        if A.has_star:
            checked += 1
            if any(deg[k] != deg[i] for k in A.star_coords(i)) and witness is None:
                witness = {"tuple": _names(A, i), "rule": "star preserves degree"}
    report.add(CheckResult("degree_rules", witness is None, witness, checked=checked))

    # unit
    unit = A._unit
    witness, checked, worst = None, 0, 0.0
    if any(deg[k] != 0 for k in unit):
        witness = {"tuple": [], "rule": "unit lies in degree zero"}
    for i in range(n):
        e = {i: A.field.one()}
        for side, val in (("left", attempt(lambda: A.mul_coords(unit, e, strict))),
                          ("right", attempt(lambda: A.mul_coords(e, unit, strict)))):
            if val is None:
                continue
            checked += 1
            ok, mag = _residual(A, _sub(A, val, e))
            worst = max(worst, mag)
            if not ok and witness is None:
                witness = {"tuple": _names(A, i), "side": side}
    report.add(CheckResult("unit", witness is None, witness, margin=worst, checked=checked))

    # associativity
    witness, checked, worst = None, 0, 0.0
    for i in range(n):
        for j in range(n):
            ij = A.product_coords(i, j)
            if ij is OUT_OF_WINDOW:
                continue
            for k in range(n):
                if not A.complete and deg[i] + deg[j] + deg[k] > A.max_degree:
                    continue
                jk = A.product_coords(j, k)
                if jk is OUT_OF_WINDOW:
                    continue
                left = attempt(lambda: A.mul_coords(ij, {k: A.field.one()}, strict))
                if left is None:
                    continue
                right = attempt(lambda: A.mul_coords({i: A.field.one()}, jk, strict))
                if right is None:
                    continue
                checked += 1
                ok, mag = _residual(A, _sub(A, left, right))
                worst = max(worst, mag)
                if not ok and witness is None:
                    witness = {"tuple": _names(A, i, j, k)}
    report.add(CheckResult("associativity", witness is None, witness, margin=worst, checked=checked))

    # Leibniz: d(ab) = d(a) b + (-1)^|a| a d(b)
    witness, checked, worst = None, 0, 0.0
    one = A.field.one()
    for i in range(n):
        for j in range(n):
            ij = A.product_coords(i, j)
            if ij is OUT_OF_WINDOW:
                continue
            lhs = attempt(lambda: A.d_of_coords(ij, strict))
            if lhs is None:
                continue
            di, dj = A.d_coords(i), A.d_coords(j)
            if di is OUT_OF_WINDOW or dj is OUT_OF_WINDOW:
                continue
            t1 = attempt(lambda: A.mul_coords(di, {j: one}, strict))
            t2 = attempt(lambda: A.mul_coords({i: one}, dj, strict))
            if t1 is None or t2 is None:
                continue
            checked += 1
            rhs = dict(t1)
            for key, v in _scale(t2, _sign(deg[i])).items():
                rhs[key] = rhs[key] + v if key in rhs else v
            ok, mag = _residual(A, _sub(A, lhs, rhs))
            worst = max(worst, mag)
            if not ok and witness is None:
                witness = {"tuple": _names(A, i, j)}
    report.add(CheckResult("leibniz", witness is None, witness, margin=worst, checked=checked))

    # d^2 = 0
    witness, checked, worst = None, 0, 0.0
    for i in range(n):
        di = A.d_coords(i)
        if di is OUT_OF_WINDOW:
            continue
        ddi = attempt(lambda: A.d_of_coords(di, strict))
        if ddi is None:
            continue
        checked += 1
        ok, mag = _residual(A, ddi)
        worst = max(worst, mag)
        if not ok and witness is None:
            witness = {"tuple": _names(A, i)}
    report.add(CheckResult("d_squared", witness is None, witness, margin=worst, checked=checked))

    if A.has_star:
        report.add(_check_star(A, attempt))
    return report


def _check_star(A: GradedBasisAlgebra, attempt) -> CheckResult:
    n = A.dim
    one = A.field.one()
    witness, checked, worst = None, 0, 0.0
    koszul = A.star_convention == "koszul"
    rule = "(ab)* = (-1)^{|a||b|} b* a*" if koszul else "(ab)* = b* a*"

    def note(ok, mag, w):
        nonlocal witness, worst
        worst = max(worst, mag)
        if not ok and witness is None:
            witness = w

    for i in range(n):
        checked += 1
        ok, mag = _residual(A, _sub(A, A.star_of_coords(A.star_coords(i)), {i: one}))
        note(ok, mag, {"tuple": _names(A, i), "rule": "star is an involution"})
        di = A.d_coords(i)
        if di is not OUT_OF_WINDOW:
            lhs = attempt(lambda: A.d_of_coords(A.star_coords(i), "strict"))
            if lhs is not None:
                checked += 1
                ok, mag = _residual(A, _sub(A, lhs, A.star_of_coords(di)))
                note(ok, mag, {"tuple": _names(A, i), "rule": "d(a*) = (da)*"})
        for j in range(n):
            ij = A.product_coords(i, j)
            if ij is OUT_OF_WINDOW:
                continue
            rhs = attempt(lambda: A.mul_coords(A.star_coords(j), A.star_coords(i), "strict"))
            if rhs is None:
                continue
            checked += 1
            if koszul:
                rhs = _scale(rhs, _sign(A.degrees[i] * A.degrees[j]))
            ok, mag = _residual(A, _sub(A, A.star_of_coords(ij), rhs))
            note(ok, mag, {"tuple": _names(A, i, j), "rule": rule})
    return CheckResult("star", witness is None, witness, margin=worst, checked=checked)


def is_graded_commutative(A: GradedBasisAlgebra) -> bool:
    """True when every in-window pair of basis elements graded-commutes."""
    n = A.dim
    f = A.field
    for i in range(n):
        for j in range(i, n):
            ij, ji = A.product_coords(i, j), A.product_coords(j, i)
            if ij is OUT_OF_WINDOW or ji is OUT_OF_WINDOW:
                continue
            s = _sign(A.degrees[i] * A.degrees[j])
            diff = _sub(A, ij, _scale(ji, s))
            if any(not f.is_zero(v) for v in diff.values()):
                return False
    return True


def tensor_dga(A: GradedBasisAlgebra, B: GradedBasisAlgebra, name: str | None = None) -> GradedBasisAlgebra:
    """Graded tensor product with Koszul signs.

    Products follow ``(a x b)(a' x b') = (-1)^{|b||a'|} aa' x bb'`` and the
    differential ``d(a x b) = da x b + (-1)^{|a|} a x db``.  If either factor
    is truncated, the result is truncated at the smallest truncated top
    degree so that every represented degree is fully represented.
    """
    if A.field is not B.field and (A.field.exact != B.field.exact):
        raise ValueError("cannot tensor exact and numeric algebras")
    f = A.field
    if A.complete and B.complete:
        top, complete = A.max_degree + B.max_degree, True
    else:
        top = min(X.max_degree for X in (A, B) if not X.complete)
        complete = False
    pairs = [(i, j) for i in range(A.dim) for j in range(B.dim)
             if A.degrees[i] + B.degrees[j] <= top]
    pairs.sort(key=lambda p: (A.degrees[p[0]] + B.degrees[p[1]], p[0], p[1]))
    pos = {p: k for k, p in enumerate(pairs)}
    basis = [(f"{A.names[i]}(x){B.names[j]}", int(A.degrees[i] + B.degrees[j])) for i, j in pairs]

    def combine(xa, xb, sign):
        out = {}
        for ka, va in xa.items():
            for kb, vb in xb.items():
                p = pos.get((ka, kb))
                if p is None:
                    return OUT_OF_WINDOW
                v = va * vb * sign
                out[p] = out[p] + v if p in out else v
        return out

    def product(s, t):
        (i, j), (k, l) = pairs[s], pairs[t]
        if A.degrees[i] + B.degrees[j] + A.degrees[k] + B.degrees[l] > top and not complete:
            return OUT_OF_WINDOW
        ik, jl = A.product_coords(i, k), B.product_coords(j, l)
        if ik is OUT_OF_WINDOW or jl is OUT_OF_WINDOW:
            return OUT_OF_WINDOW
        return combine(ik, jl, _sign(B.degrees[j] * A.degrees[k]))

    def differential(s):
        i, j = pairs[s]
        if A.degrees[i] + B.degrees[j] + 1 > top and not complete:
            return OUT_OF_WINDOW
        out = {}
        da, db = A.d_coords(i), B.d_coords(j)
        for part in ((da, {j: f.one()}, 1), ({i: f.one()}, db, _sign(A.degrees[i]))):
            if part[0] is OUT_OF_WINDOW or part[1] is OUT_OF_WINDOW:
                return OUT_OF_WINDOW
            c = combine(*part)
            if c is OUT_OF_WINDOW:
                return OUT_OF_WINDOW
            for key, v in c.items():
                out[key] = out[key] + v if key in out else v
        return out

    star = None
    if A.has_star and B.has_star:
        if A.star_convention != B.star_convention:
            raise ValueError("factors use different star conventions")
        plain = A.star_convention == "plain"

        def star(s):
            i, j = pairs[s]
            sign = _sign(A.degrees[i] * B.degrees[j]) if plain else 1
            return combine(A.star_coords(i), B.star_coords(j), sign)

    unit = combine(A._unit, B._unit, 1)
    return GradedBasisAlgebra(basis, product, differential, unit=unit, star=star,
                              max_degree=top, field=f, truncation=A.truncation, complete=complete,
                              name=name or f"{A.name}(x){B.name}", star_convention=A.star_convention,
                              metadata={"tensor_factors": (A.name, B.name)})
