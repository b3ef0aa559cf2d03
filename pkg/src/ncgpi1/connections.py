"""Connections on finitely generated projective modules.

A module is presented as ``E = p A^N`` with ``p`` an idempotent matrix of
degree-zero elements; its generators are the columns of ``p``.  A connection
is stored as ``kappa`` (an ``N x N`` matrix of one-forms) and acts by
``nabla(v) = p dv + kappa v``.  The normal form ``kappa = p kappa p`` is
checked, not forced, so that broken inputs can be diagnosed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, GradedBasisAlgebra, OutOfWindow, is_graded_commutative
from .center import CenterEmbedding, center_algebra, graded_center
from .checks import CheckReport, CheckResult
from .linalg import SparseRREF
from .matrices import AlgMatrix, block_diag, elem_times, times_elem


class NotAProjection(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class NotCommutative(ValueError):
    pass


class RestrictionEscapesCenter(ValueError):
    pass


class NotMultiplicative(ValueError):
    pass


def _tol(A: GradedBasisAlgebra, tol):
    return None if A.field.exact else (A.field.tol if tol is None else tol)


@dataclass(frozen=True, eq=False)
class FgpModule:
    algebra: GradedBasisAlgebra
    projection: AlgMatrix
    tol: float | None = None

    def __post_init__(self):
        p = self.projection
        r, c = p.shape
        if r != c:
            raise ShapeMismatch("projection must be square")
        if not p.is_homogeneous(0):
            raise NotAProjection("projection entries must have degree 0")
        t = _tol(self.algebra, self.tol)
        if not (p @ p).equals(p, t):
            raise NotAProjection(f"p^2 != p at {(p @ p - p).first_nonzero(t)}")
        if self.algebra.has_star and not p.star().equals(p, t):
            raise NotAProjection(f"p* != p at {(p.star() - p).first_nonzero(t)}")

    @classmethod
    def free(cls, A: GradedBasisAlgebra, rank: int) -> "FgpModule":
        return cls(A, AlgMatrix.identity(A, rank))

    @classmethod
    def from_elements(cls, A, rows, tol=None) -> "FgpModule":
        return cls(A, AlgMatrix.from_elements(A, rows), tol)

    @property
    def rank_ambient(self) -> int:
        return self.projection.shape[0]

    @property
    def is_free(self) -> bool:
        return self.projection.equals(AlgMatrix.identity(self.algebra, self.rank_ambient))


@dataclass(frozen=True, eq=False)
class FgpConnection:
    module: FgpModule
    kappa: AlgMatrix

    def __post_init__(self):
        N = self.module.rank_ambient
        if self.kappa.shape != (N, N):
            raise ShapeMismatch(f"kappa has shape {self.kappa.shape}, expected {(N, N)}")

    @property
    def algebra(self) -> GradedBasisAlgebra:
        return self.module.algebra

    @property
    def p(self) -> AlgMatrix:
        return self.module.projection

    @classmethod
    def from_elements(cls, module: FgpModule, kappa_rows) -> "FgpConnection":
        return cls(module, AlgMatrix.from_elements(module.algebra, kappa_rows))

    def apply(self, V: AlgMatrix) -> AlgMatrix:
        """``nabla`` applied column by column to a matrix of module elements."""
        return self.p @ V.d() + self.kappa @ V

    def generators(self) -> AlgMatrix:
        return self.p


def grassmannian(module: FgpModule) -> FgpConnection:
    """The Grassmannian connection ``v -> p dv``.

    In normal form its matrix is ``p dp p``, which vanishes identically, so the
    returned kappa is the zero matrix; the tests confirm ``p dp p = 0``.
    """
    A = module.algebra
    N = module.rank_ambient
    return FgpConnection(module, AlgMatrix.zeros(A, N, N))


def connection_from_kappa(module: FgpModule, kappa: AlgMatrix, *, compress: bool = False) -> FgpConnection:
    """``nabla = p d + kappa``; with ``compress=True`` kappa is replaced by ``p kappa p``."""
    p = module.projection
    return FgpConnection(module, p @ kappa @ p if compress else kappa)


def _test_elements(A: GradedBasisAlgebra, max_extra_degree: int = 1) -> list[AlgebraElement]:
    """Basis elements whose products with one-forms stay representable."""
    top = A.max_degree if A.complete else A.max_degree - max_extra_degree
    return [A(i) for i in range(A.dim) if A.degrees[i] <= top]


def check_connection(C: FgpConnection, tol: float | None = None) -> CheckReport:
    """Normal form, image condition and both Leibniz rules on generators."""
    A = C.algebra
    t = _tol(A, tol)
    p, kappa = C.p, C.kappa
    report = CheckReport(subject="connection")
    ok = kappa.is_homogeneous(1)
    report.add(CheckResult("kappa_degree", ok, None if ok else {"degrees": sorted(kappa.degrees())}))

    res = kappa - p @ kappa @ p
    w = res.first_nonzero(t)
    report.add(CheckResult("normal_form", w is None, None if w is None else {"entry": list(w)},
                           margin=res.max_abs(), checked=1))

    G = p
    nG = C.apply(G)
    res = nG - p @ nG
    w = res.first_nonzero(t)
    report.add(CheckResult("image", w is None, None if w is None else {"entry": list(w)},
                           margin=res.max_abs(), checked=G.shape[1]))

    worst_r, worst_l, wit_r, wit_l, checked = 0.0, 0.0, None, None, 0
    for a in _test_elements(A):
        deg = a.degree
        try:
            # right: nabla(g a) = nabla(g) a + g da
            lhs = C.apply(times_elem(G, a))
            rhs = times_elem(nG, a) + times_elem(G, a.d())
            r1 = lhs - rhs
            # left: nabla(a g) = da g + (-1)^|a| a nabla(g)
            lhs = C.apply(elem_times(a, G))
            rhs = elem_times(a.d(), G) + elem_times(a, nG).scale(-1 if deg % 2 else 1)
            r2 = lhs - rhs
        except OutOfWindow:
            continue
        checked += 1
        worst_r, worst_l = max(worst_r, r1.max_abs()), max(worst_l, r2.max_abs())
        name = A.names[next(iter(a.coords))]
        if wit_r is None and (w := r1.first_nonzero(t)) is not None:
            wit_r = {"element": name, "entry": list(w)}
        if wit_l is None and (w := r2.first_nonzero(t)) is not None:
            wit_l = {"element": name, "entry": list(w)}
    report.add(CheckResult("right_leibniz", wit_r is None, wit_r, margin=worst_r, checked=checked))
    report.add(CheckResult("left_leibniz", wit_l is None, wit_l, margin=worst_l, checked=checked))
    return report


@dataclass
class Curvature:
    matrix: AlgMatrix
    bilinearity: CheckResult
    closed_form: CheckResult

    @property
    def algebra(self):
        return self.matrix.algebra


def curvature(C: FgpConnection, tol: float | None = None) -> Curvature:
    """Curvature matrix by applying ``nabla`` twice to the generators.

    Also records two witnesses: bilinearity over the degree-zero action
    (``nabla^2(a g) = a nabla^2(g)``) and agreement with the closed form
    ``p (dp dp + d kappa) p + kappa kappa``.
    """
    A = C.algebra
    t = _tol(A, tol)
    p = C.p
    R = C.apply(C.apply(p))

    worst, wit, checked = 0.0, None, 0
    for i in A.basis_of_degree(0):
        a = A(i)
        try:
            res = C.apply(C.apply(elem_times(a, p))) - elem_times(a, R)
        except OutOfWindow:
            continue
        checked += 1
        worst = max(worst, res.max_abs())
        if wit is None and (w := res.first_nonzero(t)) is not None:
            wit = {"element": A.names[i], "entry": list(w)}
    bil = CheckResult("bilinearity", wit is None, wit, margin=worst, checked=checked)

    try:
        dp = p.d()
        closed = p @ (dp @ dp + C.kappa.d()) @ p + C.kappa @ C.kappa
        res = closed - R
        w = res.first_nonzero(t)
        cf = CheckResult("closed_form", w is None, None if w is None else {"entry": list(w)},
                         margin=res.max_abs(), checked=1)
    except OutOfWindow:
        cf = CheckResult("closed_form", True, None, checked=0, note="closed form leaves the window")
    return Curvature(R, bil, cf)


def is_flat(C: FgpConnection, tol: float | None = None) -> bool:
    return curvature(C, tol).matrix.is_zero(_tol(C.algebra, tol))


def _require_commutative(*algebras):
    for A in algebras:
        if not A.metadata.get("_commutative_checked"):
            A.metadata["_commutative"] = is_graded_commutative(A)
            A.metadata["_commutative_checked"] = True
        if not A.metadata["_commutative"]:
            raise NotCommutative(f"{A.name} is not graded commutative; reduce to the center first")


def tensor_connection(C1: FgpConnection, C2: FgpConnection) -> FgpConnection:
    """``kappa = kappa1 (x) p2 + p1 (x) kappa2`` on ``(p1 (x) p2) A^{N1 N2}``."""
    A = C1.algebra
    if C2.algebra is not A and C2.algebra.names != A.names:
        raise ShapeMismatch("connections over different algebras")
    if C2.algebra.field.exact != A.field.exact:
        raise ShapeMismatch("connections over different scalar fields (exact and numeric)")
    _require_commutative(A)
    P = C1.p.kron(C2.p)
    K = C1.kappa.kron(C2.p) + C1.p.kron(C2.kappa)
    return FgpConnection(FgpModule(A, P, C1.module.tol), K)


def pairing(X: AlgMatrix, Y: AlgMatrix) -> AlgMatrix:
    """``<X_a, Y_b> = sum_i X_ia Y_ib`` for columns ``X_a`` and ``Y_b``."""
    return X.T @ Y


@dataclass
class DualConnection:
    connection: FgpConnection
    pairing_check: CheckResult


def dual_connection(C: FgpConnection, tol: float | None = None) -> DualConnection:
    """Dual on ``p^T A^N`` with ``kappa_dual = -kappa^T``.

    The compatibility ``d<t, e> = <nabla_dual t, e> + <t, nabla e>`` is
    verified on all generator pairs and returned alongside.
    """
    A = C.algebra
    _require_commutative(A)
    t = _tol(A, tol)
    Pd = C.p.T
    Cd = FgpConnection(FgpModule(A, Pd, C.module.tol), -C.kappa.T)
    theta, eps = Pd, C.p
    lhs = pairing(theta, eps).d()
    rhs = pairing(Cd.apply(theta), eps) + pairing(theta, C.apply(eps))
    res = lhs - rhs
    w = res.first_nonzero(t)
    chk = CheckResult("dual_pairing", w is None, None if w is None else {"entry": list(w)},
                      margin=res.max_abs(), checked=theta.shape[1] * eps.shape[1])
    return DualConnection(Cd, chk)


def dual_curvature_antisymmetry(C: FgpConnection, tol: float | None = None) -> CheckResult:
    """``<R_dual t, e> + <t, R e> = 0`` on generator pairs, both curvatures computed directly."""
    A = C.algebra
    t = _tol(A, tol)
    Cd = dual_connection(C, tol).connection
    R, Rd = curvature(C, tol).matrix, curvature(Cd, tol).matrix
    res = pairing(Rd @ Cd.p, C.p) + pairing(Cd.p, R @ C.p)
    w = res.first_nonzero(t)
    return CheckResult("dual_antisymmetry", w is None, None if w is None else {"entry": list(w)},
                       margin=res.max_abs(), checked=C.p.shape[0] ** 2)


def tensor_curvature_additivity(C1: FgpConnection, C2: FgpConnection, tol: float | None = None) -> CheckResult:
    """``R_tensor = R1 (x) p2 + p1 (x) R2`` with ``R_tensor`` computed by double application."""
    A = C1.algebra
    t = _tol(A, tol)
    G = tensor_connection(C1, C2)
    RG = curvature(G, tol).matrix
    R1, R2 = curvature(C1, tol).matrix, curvature(C2, tol).matrix
    res = RG - (R1.kron(C2.p) + C1.p.kron(R2))
    w = res.first_nonzero(t)
    return CheckResult("tensor_additivity", w is None, None if w is None else {"entry": list(w)},
                       margin=res.max_abs(), checked=1)


def direct_sum(C1: FgpConnection, C2: FgpConnection) -> FgpConnection:
    A = C1.algebra
    P = block_diag(C1.p, C2.p)
    return FgpConnection(FgpModule(A, P, C1.module.tol), block_diag(C1.kappa, C2.kappa))


def check_morphism(phi: AlgMatrix, C1: FgpConnection, C2: FgpConnection, tol: float | None = None) -> CheckReport:
    """Does ``phi: E1 -> E2`` intertwine the connections, ``nabla2(phi g) = phi nabla1(g)``?

    For free modules the equivalent matrix identity ``d phi = phi kappa1 -
    kappa2 phi`` is checked as well.
    """
    A = C1.algebra
    t = _tol(A, tol)
    report = CheckReport(subject="morphism")
    N1, N2 = C1.module.rank_ambient, C2.module.rank_ambient
    if phi.shape != (N2, N1):
        raise ShapeMismatch(f"phi has shape {phi.shape}, expected {(N2, N1)}")
    ok = phi.is_homogeneous(0)
    report.add(CheckResult("degree", ok, None if ok else {"degrees": sorted(phi.degrees())}))
    res = phi - C2.p @ phi @ C1.p
    w = res.first_nonzero(t)
    report.add(CheckResult("compatible_with_projections", w is None, None if w is None else {"entry": list(w)},
                           margin=res.max_abs()))
    G = C1.p
    res = C2.apply(phi @ G) - phi @ C1.apply(G)
    w = res.first_nonzero(t)
    report.add(CheckResult("intertwines", w is None, None if w is None else {"generator": w[1], "entry": list(w)},
                           margin=res.max_abs(), checked=G.shape[1]))
    if C1.module.is_free and C2.module.is_free:
        res = phi.d() - (phi @ C1.kappa - C2.kappa @ phi)
        w = res.first_nonzero(t)
        report.add(CheckResult("free_formula", w is None, None if w is None else {"entry": list(w)},
                               margin=res.max_abs()))
    return report


@dataclass
class CenterReduction:
    connection: FgpConnection
    embedding: CenterEmbedding
    center_basis: object


def center_connection(C: FgpConnection, generators=None) -> CenterReduction:
    """Restrict a connection with graded-central coefficients to the graded center."""
    A = C.algebra
    Z = graded_center(A, generators)
    Zalg, emb = center_algebra(Z)

    def restrict(M: AlgMatrix, what: str) -> AlgMatrix:
        rows = []
        for i, row in enumerate(M.to_elements()):
            out = []
            for j, x in enumerate(row):
                z = emb.restrict(x)
                if z is None:
                    raise RestrictionEscapesCenter(f"{what}[{i}][{j}] = {x!r} is not in the computed center")
                out.append(z)
            rows.append(out)
        return AlgMatrix.from_elements(Zalg, rows)

    pZ = restrict(C.p, "projection")
    kZ = restrict(C.kappa, "kappa")
    return CenterReduction(FgpConnection(FgpModule(Zalg, pZ, C.module.tol), kZ), emb, Z)


@dataclass
class Character:
    """A multiplicative functional on the degree-zero part of a commutative algebra."""

    algebra: GradedBasisAlgebra
    values: dict = field(default_factory=dict)   # basis name -> scalar

    def __post_init__(self):
        A = self.algebra
        f = A.field
        self._vals = {A.index(k): f.coerce(v) for k, v in self.values.items()}
        for i in A.basis_of_degree(0):
            if i not in self._vals:
                raise NotMultiplicative(f"no value for degree-zero basis element {A.names[i]!r}")
        if not f.eq(self(A.one()), f.one()):
            raise NotMultiplicative("character does not send 1 to 1")
        for i in A.basis_of_degree(0):
            for j in A.basis_of_degree(0):
                try:
                    prod = A(i).mul(A(j), "strict")
                except OutOfWindow:
                    continue
                if not f.eq(self(prod), self._vals[i] * self._vals[j]):
                    raise NotMultiplicative(f"chi({A.names[i]} * {A.names[j]}) != chi({A.names[i]}) chi({A.names[j]})")

    def __call__(self, x: AlgebraElement):
        f = self.algebra.field
        out = f.zero()
        for i, c in x.coords.items():
            if self.algebra.degrees[i] == 0:
                out = out + c * self._vals[i]
        return out

    def evaluate(self, M: AlgMatrix) -> np.ndarray:
        rows = M.to_elements()
        dtype = object if self.algebra.field.exact else complex
        return np.array([[self(x) for x in row] for row in rows], dtype=dtype)


@dataclass
class Fibre:
    dimension: int
    projection: np.ndarray
    character: Character


def fibre_functor(C, chi: Character) -> Fibre:
    """Fibre of a module (or of a connection's module) at a character."""
    module = C.module if isinstance(C, FgpConnection) else C
    _require_commutative(module.algebra)
    P = chi.evaluate(module.projection)
    f = module.algebra.field
    r = SparseRREF(f)
    for row in P:
        r.add({j: v for j, v in enumerate(row)})
    return Fibre(r.rank, P, chi)
