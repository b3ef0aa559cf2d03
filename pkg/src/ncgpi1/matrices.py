"""Matrices with entries in a graded-basis algebra.

An :class:`AlgMatrix` stores an ``r x c`` matrix of algebra elements as an
array of shape ``(r, c, B)`` holding basis coordinates (``complex`` in numeric
mode, Python objects holding exact scalars otherwise).  Products expand over
pairs of basis elements that actually occur, so sparse supports stay cheap.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import OUT_OF_WINDOW, AlgebraElement, GradedBasisAlgebra, OutOfWindow, _sign


def _zeros(A: GradedBasisAlgebra, shape) -> np.ndarray:
    if A.field.exact:
        return np.full(shape, A.field.zero(), dtype=object)
    return np.zeros(shape, dtype=complex)


def _nonzero_block(A: GradedBasisAlgebra, block: np.ndarray) -> bool:
    if A.field.exact:
        return any(v.terms for v in block.flat)
    return bool(block.size) and float(np.max(np.abs(block))) > A.field.tol


class AlgMatrix:
    __slots__ = ("algebra", "data")
    __hash__ = None  # type: ignore[assignment]

    def __init__(self, algebra: GradedBasisAlgebra, data: np.ndarray):
        if data.ndim != 3 or data.shape[2] != algebra.dim:
            raise ValueError("data must have shape (rows, cols, algebra.dim)")
        self.algebra = algebra
        self.data = data

    # construction -----------------------------------------------------------
    @classmethod
    def zeros(cls, A, rows: int, cols: int) -> "AlgMatrix":
        return cls(A, _zeros(A, (rows, cols, A.dim)))

    @classmethod
    def identity(cls, A, n: int) -> "AlgMatrix":
        return cls.from_scalars(A, np.eye(n, dtype=int))

    @classmethod
    def from_scalars(cls, A, M) -> "AlgMatrix":
        """Constant matrix: each scalar entry times the unit."""
        M = np.asarray(M, dtype=object)
        out = _zeros(A, M.shape + (A.dim,))
        f = A.field
        for (i, j), v in np.ndenumerate(M):
            v = f.coerce(v)
            for k, u in A._unit.items():
                out[i, j, k] = v * u
        return cls(A, out)

    @classmethod
    def from_elements(cls, A, rows: Sequence[Sequence]) -> "AlgMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        out = _zeros(A, (r, c, A.dim))
        f = A.field
        for i, row in enumerate(rows):
            if len(row) != c:
                raise ValueError("ragged matrix")
            for j, x in enumerate(row):
                if not isinstance(x, AlgebraElement):
                    x = A.scalar(x)
                elif x.algebra is not A and x.algebra.names != A.names:
                    raise ValueError("entry from a different algebra")
                for k, v in x.coords.items():
                    out[i, j, k] = f.coerce(v)
        return cls(A, out)

    @classmethod
    def diagonal(cls, A, elems: Sequence) -> "AlgMatrix":
        n = len(elems)
        z = A.zero()
        return cls.from_elements(A, [[elems[i] if i == j else z for j in range(n)] for i in range(n)])

    # basic access --------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def entry(self, i: int, j: int) -> AlgebraElement:
        A = self.algebra
        f = A.field
        return AlgebraElement(A, {k: v for k, v in enumerate(self.data[i, j]) if not f.is_zero(v)})

    def to_elements(self) -> list[list[AlgebraElement]]:
        r, c = self.shape
        return [[self.entry(i, j) for j in range(c)] for i in range(r)]

    def support(self) -> list[int]:
        A = self.algebra
        return [k for k in range(A.dim) if _nonzero_block(A, self.data[:, :, k])]

    def degrees(self) -> set[int]:
        return {int(self.algebra.degrees[k]) for k in self.support()}

    def is_homogeneous(self, degree: int) -> bool:
        return self.degrees() <= {degree}

    def column(self, j: int) -> "AlgMatrix":
        return AlgMatrix(self.algebra, self.data[:, j:j + 1, :].copy())

    def block(self, rows, cols) -> "AlgMatrix":
        return AlgMatrix(self.algebra, self.data[np.ix_(rows, cols)].copy())

    def _like(self, data) -> "AlgMatrix":
        return AlgMatrix(self.algebra, data)

    # linear structure ----------------------------------------------------------
    def _check(self, other: "AlgMatrix"):
        if not isinstance(other, AlgMatrix):
            raise TypeError("expected an AlgMatrix")
        if other.algebra is not self.algebra and other.algebra.names != self.algebra.names:
            raise ValueError("matrices over different algebras")

    def __add__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return self._like(self.data + other.data)

    def __sub__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return self._like(self.data - other.data)

    def __neg__(self) -> "AlgMatrix":
        return self._like(-self.data)

    def scale(self, c) -> "AlgMatrix":
        c = self.algebra.field.coerce(c)
        return self._like(self.data * c)

    @property
    def T(self) -> "AlgMatrix":
        """Plain transpose of the entry array (no signs, entries unchanged)."""
        return self._like(self.data.transpose(1, 0, 2).copy())

    # algebra structure ---------------------------------------------------------
    def __matmul__(self, other: "AlgMatrix") -> "AlgMatrix":
        self._check(other)
        A = self.algebra
        (r, m), (m2, c) = self.shape, other.shape
        if m != m2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = _zeros(A, (r, c, A.dim))
        sa, sb = self.support(), other.support()
        for a in sa:
            X = self.data[:, :, a]
            for b in sb:
                prod = A.product_coords(a, b)
                if prod is OUT_OF_WINDOW:
                    if A.truncation == "strict" and _nonzero_block(A, X @ other.data[:, :, b]):
                        raise OutOfWindow(f"{A.names[a]} * {A.names[b]} leaves the window")
                    continue
                if not prod:
                    continue
                M = X @ other.data[:, :, b]
                for k, v in prod.items():
                    out[:, :, k] = out[:, :, k] + M * v
        return self._like(out)

    def kron(self, other: "AlgMatrix") -> "AlgMatrix":
        """Kronecker product with entries ``X_ij * Y_kl`` (left factor first)."""
        self._check(other)
        A = self.algebra
        (r1, c1), (r2, c2) = self.shape, other.shape
        out = _zeros(A, (r1 * r2, c1 * c2, A.dim))
        for a in self.support():
            for b in other.support():
                prod = A.product_coords(a, b)
                M = np.kron(self.data[:, :, a], other.data[:, :, b])
                if prod is OUT_OF_WINDOW:
                    if A.truncation == "strict" and _nonzero_block(A, M):
                        raise OutOfWindow(f"{A.names[a]} * {A.names[b]} leaves the window")
                    continue
                for k, v in prod.items():
                    out[:, :, k] = out[:, :, k] + M * v
        return self._like(out)

    def d(self) -> "AlgMatrix":
        A = self.algebra
        out = _zeros(A, self.data.shape)
        for a in self.support():
            img = A.d_coords(a)
            if img is OUT_OF_WINDOW:
                if A.truncation == "strict":
                    raise OutOfWindow(f"d({A.names[a]}) leaves the window")
                continue
            for k, v in img.items():
                out[:, :, k] = out[:, :, k] + self.data[:, :, a] * v
        return self._like(out)

    def star(self) -> "AlgMatrix":
        """Conjugate transpose with the algebra star applied to entries."""
        A = self.algebra
        f = A.field
        src = self.data.transpose(1, 0, 2)
        out = _zeros(A, src.shape)
        for a in self.support():
            block = src[:, :, a]
            conj = np.conj(block) if not f.exact else np.vectorize(f.conj, otypes=[object])(block)
            for k, v in A.star_coords(a).items():
                out[:, :, k] = out[:, :, k] + conj * v
        return self._like(out)

    def graded_sign_twist(self) -> "AlgMatrix":
        """Multiply every odd-degree coordinate by -1."""
        signs = np.array([_sign(int(k)) for k in self.algebra.degrees])
        return self._like(self.data * signs)

    # comparison ---------------------------------------------------------------
    def max_abs(self) -> float:
        A = self.algebra
        if A.field.exact:
            return max((abs(v.to_complex()) for v in self.data.flat if v.terms), default=0.0)
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def is_zero(self, tol: float | None = None) -> bool:
        A = self.algebra
        if A.field.exact:
            return all(v.is_zero() for v in self.data.flat if v.terms)
        return self.max_abs() <= (A.field.tol if tol is None else tol)

    def first_nonzero(self, tol: float | None = None):
        """(row, col, basis name) of the first nonzero coordinate, or None."""
        A = self.algebra
        f = A.field
        r, c = self.shape
        for i in range(r):
            for j in range(c):
                for k in range(A.dim):
                    v = self.data[i, j, k]
                    if f.exact:
                        if v.terms and not v.is_zero():
                            return i, j, A.names[k]
                    elif abs(v) > (f.tol if tol is None else tol):
                        return i, j, A.names[k]
        return None

    def equals(self, other: "AlgMatrix", tol: float | None = None) -> bool:
        return self.shape == other.shape and (self - other).is_zero(tol)

    def to_complex(self, theta_values=()) -> np.ndarray:
        if self.algebra.field.exact:
            return np.vectorize(lambda v: v.to_complex(theta_values), otypes=[complex])(self.data)
        return self.data.copy()

    def __repr__(self):
        return f"AlgMatrix({self.shape[0]}x{self.shape[1]} over {self.algebra.name})"


def block_diag(*mats: AlgMatrix) -> AlgMatrix:
    A = mats[0].algebra
    r = sum(m.shape[0] for m in mats)
    c = sum(m.shape[1] for m in mats)
    out = _zeros(A, (r, c, A.dim))
    i = j = 0
    for m in mats:
        m._check(mats[0])
        out[i:i + m.shape[0], j:j + m.shape[1]] = m.data
        i += m.shape[0]
        j += m.shape[1]
    return AlgMatrix(A, out)


def elem_times(a: AlgebraElement, X: AlgMatrix) -> AlgMatrix:
    r, _ = X.shape
    return AlgMatrix.diagonal(X.algebra, [a] * r) @ X


def times_elem(X: AlgMatrix, a: AlgebraElement) -> AlgMatrix:
    _, c = X.shape
    return X @ AlgMatrix.diagonal(X.algebra, [a] * c)
