"""Ready-made dgas used throughout the examples and tests."""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial

import numpy as np

from .algebra import OUT_OF_WINDOW, GradedBasisAlgebra
from .scalars import EXACT


def subset_sign(I: tuple, J: tuple) -> int:
    """Sign of sorting the concatenation I + J of sorted index tuples (0 if they meet)."""
    if set(I) & set(J):
        return 0
    inversions = sum(1 for a in I for b in J if a > b)
    return -1 if inversions % 2 else 1


def wedge_name(I: tuple, prefix: str = "eta") -> str:
    return "1" if not I else "^".join(f"{prefix}{k}" for k in I)


def exterior(n: int, field=EXACT, prefix: str = "eta") -> GradedBasisAlgebra:
    """Exterior algebra on ``n`` degree-one generators with zero differential.

    The star fixes the generators, so ``(eta_I)* = (-1)^{k(k-1)/2} eta_I`` for
    a wedge monomial of length k.
    """
    subsets = [I for k in range(n + 1) for I in itertools.combinations(range(1, n + 1), k)]
    pos = {I: i for i, I in enumerate(subsets)}
    basis = [(wedge_name(I, prefix), len(I)) for I in subsets]

    def product(i, j):
        I, J = subsets[i], subsets[j]
        s = subset_sign(I, J)
        if s == 0:
            return {}
        return {pos[tuple(sorted(I + J))]: s}

    def star(i):
        k = len(subsets[i])
        return {i: -1 if (k * (k - 1) // 2) % 2 else 1}

    return GradedBasisAlgebra(basis, product, {}, unit={0: 1}, star=star, max_degree=n, field=field,
                              complete=True, name=f"exterior({n})",
                              metadata={"builder": "exterior", "n": n, "subsets": subsets})


def _matrix_unit_dga(max_degree: int, allowed, D: np.ndarray, name: str, star: bool, field, builder: str):
    """Degree-k copies of 2x2 matrix units with d(X) = D X - (-1)^k X D."""
    units = []
    for k in range(max_degree + 1):
        for (a, b) in allowed(k):
            units.append((k, a, b))
    pos = {u: i for i, u in enumerate(units)}
    basis = [(f"E{a + 1}{b + 1}_{k}", k) for (k, a, b) in units]

    def product(i, j):
        k1, a, b = units[i]
        k2, c, e = units[j]
        if k1 + k2 > max_degree:
            return OUT_OF_WINDOW
        if b != c:
            return {}
        return {pos[(k1 + k2, a, e)]: 1}

    def differential(i):
        k, a, b = units[i]
        if k + 1 > max_degree:
            return OUT_OF_WINDOW
        X = np.zeros((2, 2), dtype=int)
        X[a, b] = 1
        Y = D @ X - (-1) ** k * (X @ D)
        return {pos[(k + 1, r, c)]: int(Y[r, c]) for r in range(2) for c in range(2) if Y[r, c]}

    star_rule = None
    if star:
        def star_rule(i):
            k, a, b = units[i]
            return {pos[(k, b, a)]: 1}

    unit = {pos[(0, 0, 0)]: 1, pos[(0, 1, 1)]: 1}
    return GradedBasisAlgebra(basis, product, differential, unit=unit, star=star_rule,
                              max_degree=max_degree, field=field, complete=False, name=name,
                              metadata={"builder": builder, "max_degree": max_degree})


def two_point(max_degree: int, star: bool = False, field=EXACT) -> GradedBasisAlgebra:
    """Universal differential calculus of the two-point space, truncated.

    Even degrees are diagonal 2x2 matrices, odd degrees off-diagonal ones, and
    ``d`` is the graded commutator with the odd element ``[[0,1],[1,0]]``:
    ``diag(a, b) -> [[0, b-a], [a-b, 0]]`` and ``offdiag(b, c) -> (b+c) I``.

    ``star=True`` attaches the conjugate transpose.  It is antimultiplicative
    and involutive but does not commute with ``d`` (the axiom checker reports
    the failure), which is why it is off by default.
    """
    F = np.array([[0, 1], [1, 0]])

    def allowed(k):
        return [(0, 0), (1, 1)] if k % 2 == 0 else [(0, 1), (1, 0)]

    return _matrix_unit_dga(max_degree, allowed, F, f"two_point({max_degree})", star, field, "two_point")


def identified_points(max_degree: int, star: bool = False, field=EXACT) -> GradedBasisAlgebra:
    """``M_2(C)`` in every degree with ``d`` the graded commutator with diag(1, -1).

    In even degree ``[[a,b],[c,d]] -> [[0,2b],[-2c,0]]``, in odd degree
    ``-> [[2a,0],[0,-2d]]``.
    """
    D = np.array([[1, 0], [0, -1]])

    def allowed(k):
        return [(0, 0), (0, 1), (1, 0), (1, 1)]

    return _matrix_unit_dga(max_degree, allowed, D, f"identified_points({max_degree})", star, field,
                            "identified_points")


def matrix_element(A: GradedBasisAlgebra, degree: int, M) -> "object":
    """Element of a matrix-unit dga from a 2x2 array placed in the given degree."""
    coords = {}
    for a in range(2):
        for b in range(2):
            v = M[a][b]
            if v:
                coords[f"E{a + 1}{b + 1}_{degree}"] = v
    return A.element(coords)


def element_matrix(x, degree: int) -> list[list]:
    """Inverse of :func:`matrix_element` for the degree-``degree`` part of ``x``."""
    A = x.algebra
    f = A.field
    out = [[f.zero(), f.zero()], [f.zero(), f.zero()]]
    for a in range(2):
        for b in range(2):
            nm = f"E{a + 1}{b + 1}_{degree}"
            if nm in A._index:
                out[a][b] = x.coefficient(nm)
    return out


def jet(order: int, field=EXACT) -> GradedBasisAlgebra:
    """Truncated polynomials ``C[x]/(x^order)`` with one-forms ``C[x]/(x^(order-1)) dx``.

    A commutative dga in degrees 0 and 1 that has nonconstant elements, used
    for projections and morphisms that genuinely vary.  ``x`` and ``dx`` are
    self-adjoint.
    """
    if order < 1:
        raise ValueError("order must be positive")
    names0 = ["1", "x"] + [f"x^{j}" for j in range(2, order)]
    names1 = ["dx", "x*dx"] + [f"x^{j}*dx" for j in range(2, order - 1)]
    names0, names1 = names0[:order], names1[:max(order - 1, 0)]
    basis = [(n, 0) for n in names0] + [(n, 1) for n in names1]
    off = order

    def product(i, j):
        di, dj = int(i >= off), int(j >= off)
        if di + dj > 1:
            return {}
        a = i - off * di
        b = j - off * dj
        e = a + b
        if di + dj == 0:
            return {e: 1} if e < order else {}
        return {off + e: 1} if e < order - 1 else {}

    def differential(i):
        if i >= off or i == 0:
            return {}
        return {off + i - 1: i}

    return GradedBasisAlgebra(basis, product, differential, unit={0: 1}, star=lambda i: {i: 1},
                              max_degree=1, field=field, complete=True, name=f"jet({order})",
                              metadata={"builder": "jet", "order": order})


def truncated_exponential(A: GradedBasisAlgebra, c=1):
    """``exp(c x)`` in a jet algebra; satisfies ``d a = a * (c dx)`` exactly."""
    order = A.metadata["order"]
    f = A.field
    c = f.coerce(c)
    coords, power = {}, f.one()
    for j in range(order):
        coords[j] = power * f.coerce(Fraction(1, factorial(j)))
        power = power * c
    return A.element(coords)


BUILDERS = {
    "exterior": lambda p: exterior(int(p.get("n", 1))),
    "two_point": lambda p: two_point(int(p.get("max_degree", 7)), bool(p.get("star", False))),
    "identified_points": lambda p: identified_points(int(p.get("max_degree", 7)), bool(p.get("star", False))),
    "jet": lambda p: jet(int(p.get("order", 4))),
}
