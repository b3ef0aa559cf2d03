"""Characteristic coefficients, polynomial pseudoinverses and the D_m inequality.

Matrices may be numpy arrays (complex floats, or objects holding exact
scalars) or :class:`AlgMatrix` instances with degree-zero entries in a
graded-commutative algebra.  Coefficients follow the convention

    chi(x) = det(x - M) = sum_m (-1)^(n-m) a_m x^m,

so ``a_n = 1``, ``a_(n-1) = tr M`` and ``a_0 = det M``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .algebra import AlgebraElement
from .connections import FgpConnection, FgpModule, check_connection, check_morphism
from .matrices import AlgMatrix, elem_times
from .scalars import EXACT, ExactScalar


class NotInvertible(ArithmeticError):
    pass


class MorphismCheckFailed(ValueError):
    pass


# --- ring adapters -----------------------------------------------------------------

class _ArrayOps:
    """Adapter for numpy arrays of complex floats or exact scalars."""

    def __init__(self, exact: bool):
        self.exact = exact

    def entries(self, M):
        return [list(row) for row in M]

    def zero(self):
        return ExactScalar() if self.exact else 0j

    def one(self):
        return ExactScalar.gaussian(1) if self.exact else 1 + 0j

    def identity(self, n):
        if self.exact:
            out = np.full((n, n), ExactScalar(), dtype=object)
            for i in range(n):
                out[i, i] = ExactScalar.gaussian(1)
            return out
        return np.eye(n, dtype=complex)

    def zeros(self, r, c):
        return np.full((r, c), ExactScalar(), dtype=object) if self.exact else np.zeros((r, c), dtype=complex)

    def scale(self, c, X):
        return X * c

    def star(self, X):
        if self.exact:
            return np.vectorize(lambda v: ExactScalar.coerce(v).conjugate(), otypes=[object])(X).T
        return X.conj().T

    def is_zero(self, c) -> bool:
        return ExactScalar.coerce(c).is_zero() if self.exact else c == 0

    def magnitude(self, c) -> float:
        return abs(ExactScalar.coerce(c).to_complex()) if self.exact else abs(c)

    def inverse(self, c):
        return ExactScalar.coerce(c).inverse() if self.exact else 1 / c

    def rational(self, q: Fraction):
        return ExactScalar.gaussian(q) if self.exact else complex(float(q))

    def norm(self, X) -> float:
        if self.exact:
            X = np.vectorize(lambda v: ExactScalar.coerce(v).to_complex(), otypes=[complex])(X)
        return float(np.linalg.norm(X, 2)) if X.size else 0.0

    def max_abs(self, X) -> float:
        if self.exact:
            return max((abs(ExactScalar.coerce(v).to_complex()) for v in X.flat), default=0.0)
        return float(np.max(np.abs(X))) if X.size else 0.0

    def matrix_is_zero(self, X, tol) -> bool:
        if self.exact:
            return all(ExactScalar.coerce(v).is_zero() for v in X.flat)
        return self.max_abs(X) <= tol


class _AlgOps:
    """Adapter for :class:`AlgMatrix` with degree-zero entries."""

    def __init__(self, algebra):
        self.A = algebra
        self.exact = algebra.field.exact

    def entries(self, M):
        return M.to_elements()

    def zero(self):
        return self.A.zero()

    def one(self):
        return self.A.one()

    def identity(self, n):
        return AlgMatrix.identity(self.A, n)

    def zeros(self, r, c):
        return AlgMatrix.zeros(self.A, r, c)

    def scale(self, c, X):
        if isinstance(c, AlgebraElement):
            return elem_times(c, X)
        return X.scale(c)

    def star(self, X):
        return X.star()

    def is_zero(self, c) -> bool:
        return c.is_zero()

    def magnitude(self, c) -> float:
        return c.max_abs()

    def inverse(self, c):
        return invert_degree_zero(c)

    def rational(self, q: Fraction):
        return self.A.scalar(q if self.exact else float(q))

    def norm(self, X) -> float:
        return X.max_abs() * max(X.shape)

    def max_abs(self, X) -> float:
        return X.max_abs()

    def matrix_is_zero(self, X, tol) -> bool:
        return X.is_zero(tol)


def _ops(M):
    if isinstance(M, AlgMatrix):
        return _AlgOps(M.algebra)
    M = np.asarray(M)
    return _ArrayOps(M.dtype == object)


def _as_array(M):
    if isinstance(M, AlgMatrix):
        return M
    M = np.asarray(M)
    if M.dtype == object:
        return np.vectorize(ExactScalar.coerce, otypes=[object])(M)
    return M.astype(complex)


def invert_degree_zero(x: AlgebraElement) -> AlgebraElement:
    """Inverse of a degree-zero element of a commutative algebra, via a linear solve."""
    from .linalg import SparseRREF

    A = x.algebra
    f = A.field
    deg0 = A.basis_of_degree(0)
    # columns: unknown coordinates y_b; rows: coordinates of x*y
    cols = {b: A.mul_coords(x.coords, {b: f.one()}) for b in deg0}
    n = len(deg0)
    rref = SparseRREF(f)
    target = A.one().coords
    for row_index in deg0:
        row = {c: cols[b].get(row_index, f.zero()) for c, b in enumerate(deg0)}
        row[n] = target.get(row_index, f.zero())
        rref.add(row)
    if n in rref.pivots or any(c not in rref.pivots for c in range(n)):
        raise NotInvertible(f"{x!r} is not invertible in degree zero")
    y = A.element({deg0[c]: rref.pivots[c].get(n, f.zero()) for c in range(n)})
    if not (x * y == A.one()):
        raise NotInvertible(f"{x!r} is not invertible in degree zero")
    return y


def _sum(items, zero):
    out = zero
    for x in items:
        out = out + x
    return out


# --- characteristic coefficients --------------------------------------------------

def berkowitz(entries: list[list], zero, one) -> list:
    """Coefficients ``[1, c_1, ..., c_n]`` of ``det(x - M) = x^n + c_1 x^(n-1) + ...``.

    Division free, so it works over any commutative ring.
    """
    n = len(entries)
    if n == 0:
        return [one]
    vec = [one, -entries[n - 1][n - 1]]
    for k in range(n - 2, -1, -1):
        size = n - k
        a = entries[k][k]
        R = entries[k][k + 1:]
        v = [entries[i][k] for i in range(k + 1, n)]
        sub = [row[k + 1:] for row in entries[k + 1:]]
        diags = [one, -a]
        for _ in range(size - 1):
            diags.append(-_sum((r * c for r, c in zip(R, v)), zero))
            v = [_sum((s * c for s, c in zip(row, v)), zero) for row in sub]
        vec = [_sum((diags[i - j] * vec[j] for j in range(min(i, size - 1) + 1)), zero)
               for i in range(size + 1)]
    return vec


def char_coefficients(M) -> list:
    """``[a_0, ..., a_n]`` with ``det(x - M) = sum (-1)^(n-m) a_m x^m``."""
    M = _as_array(M)
    ops = _ops(M)
    E = ops.entries(M)
    n = len(E)
    c = berkowitz(E, ops.zero(), ops.one())
    # c[k] is the coefficient of x^(n-k)
    return [c[n - m] * (-1 if (n - m) % 2 else 1) for m in range(n + 1)]


def faddeev_leverrier(M) -> list:
    """Same coefficients as :func:`char_coefficients` by the trace recurrence."""
    M = _as_array(M)
    ops = _ops(M)
    n = M.shape[0]
    c = [None] * (n + 1)   # c[j] coefficient of x^j in det(x - M)
    c[n] = ops.one()
    I = ops.identity(n)
    Mk = ops.zeros(n, n)
    for k in range(1, n + 1):
        Mk = M @ Mk + ops.scale(c[n - k + 1], I)
        T = M @ Mk
        tr = _sum((ops.entries(T)[i][i] for i in range(n)), ops.zero())
        c[n - k] = tr * ops.rational(Fraction(-1, k))
    return [c[m] * (-1 if (n - m) % 2 else 1) for m in range(n + 1)]


def cayley_hamilton_residual(M, coeffs=None) -> float:
    """Max-abs of ``chi(M)``, divided by ``max(1, |M|)^n`` to make it scale free."""
    M = _as_array(M)
    ops = _ops(M)
    a = char_coefficients(M) if coeffs is None else coeffs
    n = len(a) - 1
    acc = ops.zeros(n, n)
    for m in range(n, -1, -1):          # Horner on sum (-1)^(n-m) a_m x^m
        acc = acc @ M if m < n else acc
        acc = acc + ops.scale(a[m] * (-1 if (n - m) % 2 else 1), ops.identity(n))
    scale = max(1.0, ops.norm(M)) ** n
    return ops.max_abs(acc) / scale


# --- pseudoinverse ------------------------------------------------------------------

@dataclass
class PseudoInverse:
    phi_plus: object
    m: int                         # smallest index with a_m nonzero
    rank: int                      # n - m
    coefficients: list             # a_0..a_n of phi* phi
    normalized: list               # |a_j| / (C(n, n-j) sigma_max^(2(n-j))), numeric only
    eps_rank: float

    @property
    def margin_above(self) -> float:
        """How far the chosen a_m clears the threshold (ratio; inf in exact mode)."""
        return float("inf") if self.normalized is None else self.normalized[self.m] / self.eps_rank

    @property
    def margin_below(self) -> float:
        """Largest ratio threshold / a_j among the discarded j < m (inf if none)."""
        if self.normalized is None or self.m == 0:
            return float("inf")
        worst = max(self.normalized[: self.m])
        return float("inf") if worst == 0 else self.eps_rank / worst

    def well_margined(self, factor: float = 1e3) -> bool:
        return self.margin_above >= factor and self.margin_below >= factor


def pseudoinverse(phi, eps_rank: float = 1e-10, extended: bool = True) -> PseudoInverse:
    """Polynomial pseudoinverse ``phi+ = q(phi* phi) phi*``.

    With ``a_j`` the coefficients of ``phi* phi`` (size n) and ``m`` the
    smallest index with ``a_m != 0``,
    ``q(x) = (-1)^(n-m-1) a_m^(-1) sum_{j=m+1}^{n} (-1)^(n-j) a_j x^(j-m-1)``.
    In numeric mode ``a_j`` counts as zero when
    ``|a_j| <= eps_rank * C(n, n-j) * sigma_max^(2(n-j))``.

    Numeric inputs are rescaled to ``sigma_max = 1`` and, with ``extended``,
    the coefficients and the polynomial are evaluated in long double before
    rounding back to complex128.
    """
    phi = _as_array(phi)
    ops = _ops(phi)
    scale = 1.0
    work = phi
    if not ops.exact and isinstance(phi, np.ndarray):
        scale = ops.norm(phi)
        if scale == 0.0:
            n = phi.shape[1]
            return PseudoInverse(np.zeros(phi.T.shape, dtype=complex), n, 0, [1.0 + 0j] + [0j] * n,
                                 [0.0] * n + [1.0], eps_rank)
        work = phi / scale
        if extended:
            work = work.astype(np.clongdouble)
    ps = ops.star(work)
    M = ps @ work
    n = M.shape[0]
    a = char_coefficients(M) if not (extended and not ops.exact and isinstance(phi, np.ndarray)) \
        else _char_coefficients_raw(M, ops)
    normalized = None
    if ops.exact:
        m = next(j for j in range(n + 1) if not ops.is_zero(a[j]))
    else:
        smax2 = 1.0 if isinstance(phi, np.ndarray) else max(ops.norm(phi) ** 2, np.finfo(float).tiny)
        normalized = [float(abs(a[j])) / (comb(n, n - j) * smax2 ** (n - j)) if not isinstance(a[j], AlgebraElement)
                      else a[j].max_abs() / (comb(n, n - j) * smax2 ** (n - j)) for j in range(n + 1)]
        m = next(j for j in range(n + 1) if normalized[j] > eps_rank)
    coeffs = a
    if isinstance(phi, np.ndarray) and not ops.exact:
        # report coefficients of phi* phi itself, not of the rescaled matrix
        coeffs = [complex(a[j]) * scale ** (2 * (n - j)) for j in range(n + 1)]
    if m == n:
        return PseudoInverse(ops.zeros(*phi.T.shape), m, 0, coeffs, normalized, eps_rank)
    inv = ops.inverse(a[m])
    lead = -1 if (n - m - 1) % 2 else 1
    # q(x) = sum_k b_k x^k, b_k = lead * a_m^-1 * (-1)^(n-j) a_j with j = k + m + 1
    b = [a[k + m + 1] * (-1 if (n - (k + m + 1)) % 2 else 1) for k in range(n - m)]
    I = ops.identity(n) if not isinstance(M, np.ndarray) else np.eye(n, dtype=M.dtype)
    acc = ops.zeros(n, n) if not isinstance(M, np.ndarray) else np.zeros((n, n), dtype=M.dtype)
    for k in range(n - m - 1, -1, -1):
        acc = acc @ M + ops.scale(b[k], I)
    q = ops.scale(lead, ops.scale(inv, acc))
    out = q @ ps
    if isinstance(phi, np.ndarray) and not ops.exact:
        out = (out / scale).astype(complex)
    return PseudoInverse(out, m, n - m, coeffs, normalized, eps_rank)


def _char_coefficients_raw(M, ops) -> list:
    E = ops.entries(M)
    n = len(E)
    zero, one = M.dtype.type(0), M.dtype.type(1)
    c = berkowitz(E, zero, one)
    return [c[n - m] * (-1 if (n - m) % 2 else 1) for m in range(n + 1)]


def penrose_residuals(phi, phi_plus) -> dict:
    """Max-abs residuals of the four Moore-Penrose identities."""
    phi, phi_plus = _as_array(phi), _as_array(phi_plus)
    ops = _ops(phi)
    r1 = ops.max_abs(phi @ phi_plus @ phi - phi)
    r2 = ops.max_abs(phi_plus @ phi @ phi_plus - phi_plus)
    pp, qq = phi @ phi_plus, phi_plus @ phi
    r3 = ops.max_abs(ops.star(pp) - pp)
    r4 = ops.max_abs(ops.star(qq) - qq)
    return {"phi_phiplus_phi": r1, "phiplus_phi_phiplus": r2, "phi_phiplus_selfadjoint": r3,
            "phiplus_phi_selfadjoint": r4}


@dataclass
class SplitData:
    """Idempotents splitting a morphism.

    For ``phi: p1 A^N1 -> p2 A^N2`` these are ``e_ker = p1 - phi+ phi``,
    ``e_coim = phi+ phi``, ``e_im = phi phi+`` and ``e_coker = p2 - phi phi+``;
    for free modules ``p1`` and ``p2`` are identities.
    """

    pseudo: PseudoInverse
    e_ker: object
    e_coim: object
    e_im: object
    e_coker: object
    connections: dict | None = None
    checks: dict | None = None


def _trace_rank(E, ops) -> float | None:
    entries = ops.entries(E)
    tr = _sum((entries[i][i] for i in range(len(entries))), ops.zero())
    if isinstance(tr, AlgebraElement):
        # meaningful only when the trace is a constant multiple of the unit
        A = tr.algebra
        if len(A._unit) != 1:
            return None
        (k, u), = A._unit.items()
        c = tr.coords.get(k, A.field.zero()) * A.field.inv(u)
        if not (tr == A.one() * c):
            return None
        tr = c
    val = complex(tr.to_complex() if isinstance(tr, ExactScalar) else tr)
    return val.real


def split(phi, p1=None, p2=None, eps_rank: float = 1e-10) -> SplitData:
    phi = _as_array(phi)
    ops = _ops(phi)
    N2, N1 = phi.shape
    p1 = ops.identity(N1) if p1 is None else p1
    p2 = ops.identity(N2) if p2 is None else p2
    P = pseudoinverse(phi, eps_rank)
    coim = P.phi_plus @ phi
    im = phi @ P.phi_plus
    return SplitData(P, p1 - coim, coim, im, p2 - im)


def split_with_connections(phi: AlgMatrix, C1: FgpConnection, C2: FgpConnection,
                           eps_rank: float = 1e-10, tol: float | None = None) -> SplitData:
    """Split a morphism of modules with connections and compress the connections.

    The kernel and coimage carry ``e kappa1 e``, the image and cokernel
    ``e kappa2 e``; each induced connection is checked, as is the
    comparison ``phi: coim -> im``.
    """
    rep = check_morphism(phi, C1, C2, tol)
    if not rep.passed:
        raise MorphismCheckFailed(f"not a morphism of connections: {rep.first_failure()}")
    S = split(phi, C1.p, C2.p, eps_rank)
    A = phi.algebra
    conns, checks = {}, {}
    for name, e, C in (("ker", S.e_ker, C1), ("coim", S.e_coim, C1), ("im", S.e_im, C2), ("coker", S.e_coker, C2)):
        module = FgpModule(A, e, tol)
        conns[name] = FgpConnection(module, e @ C.kappa @ e)
        checks[name] = check_connection(conns[name], tol)
    checks["comparison"] = check_morphism(phi @ S.e_coim, conns["coim"], conns["im"], tol)
    ops = _ops(phi)
    checks["ranks"] = {k: _trace_rank(getattr(S, "e_" + k), ops) for k in ("ker", "coim", "im", "coker")}
    S.connections, S.checks = conns, checks
    return S


# --- the D_m inequality ------------------------------------------------------------------

def principal_minor_sum(A: np.ndarray, m: int) -> complex:
    """Sum of all m x m principal minors (``D_0 = 1``)."""
    n = A.shape[0]
    if m == 0:
        return 1.0 + 0j
    if m > n:
        return 0j
    return complex(sum(np.linalg.det(A[np.ix_(S, S)]) for S in itertools.combinations(range(n), m)))


def dm_value(M: np.ndarray, m: int) -> float:
    """``D_m(M* M)``: the m-th elementary symmetric function of the squared singular values."""
    M = np.asarray(M, dtype=complex)
    return principal_minor_sum(M.conj().T @ M, m).real


def dm_direction(M: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``2 Re(M* [M, K]) = X + X*`` with ``X = M* (MK - KM)``."""
    X = M.conj().T @ (M @ K - K @ M)
    return X + X.conj().T


@dataclass
class DmCheck:
    n: int
    m: int
    lhs: float
    rhs: float
    passed: bool
    slack: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def dm_derivative_check(M, K, m: int, h: float | None = None, rel_slack: float = 1e-4,
                        abs_floor: float | None = None) -> DmCheck:
    """Check ``|d/dt D_m(M*M + t H)| <= 4 n |K|_HS D_m(M*M)`` at t = 0 by central differences."""
    M = np.asarray(M, dtype=complex)
    K = np.asarray(K, dtype=complex)
    n = M.shape[0]
    A = M.conj().T @ M
    H = dm_direction(M, K)
    hn = float(np.linalg.norm(H))
    if h is None:
        h = 1e-5 / max(1.0, hn)
    lhs = abs((principal_minor_sum(A + h * H, m) - principal_minor_sum(A - h * H, m)).real / (2 * h))
    d0 = principal_minor_sum(A, m).real
    rhs = 4 * n * float(np.linalg.norm(K)) * d0
    if abs_floor is None:
        # rounding noise of the difference quotient
        abs_floor = 1e3 * np.finfo(float).eps * comb(n, m) * max(1.0, float(np.linalg.norm(A))) ** m / h
    passed = lhs <= rhs * (1 + rel_slack) + abs_floor
    return DmCheck(n, m, float(lhs), float(rhs), bool(passed), float(rhs * (1 + rel_slack) + abs_floor - lhs))


def dm_derivative_exact(M, K, m: int) -> float:
    """``d/dt D_m`` at t = 0 as ``sum_S tr(adj(A_S) H_S)`` (adjugate by cofactors)."""
    M = np.asarray(M, dtype=complex)
    A = M.conj().T @ M
    H = dm_direction(M, np.asarray(K, dtype=complex))
    n = A.shape[0]
    if m == 0:
        return 0.0
    total = 0j
    for S in itertools.combinations(range(n), m):
        As, Hs = A[np.ix_(S, S)], H[np.ix_(S, S)]
        total += np.trace(_adjugate(As) @ Hs)
    return total.real


def _adjugate(X: np.ndarray) -> np.ndarray:
    k = X.shape[0]
    if k == 1:
        return np.ones((1, 1), dtype=X.dtype)
    adj = np.empty_like(X)
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(X, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj
