"""Integer lattices: Hermite normal form, integer kernels, membership.

All arithmetic is on Python ints, so results are exact for any size.
Matrices are lists of rows.
"""

from __future__ import annotations

from typing import Sequence


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _combine(r1: list, r2: list, a: int, b: int, c: int, d: int) -> tuple[list, list]:
    return ([a * u + b * v for u, v in zip(r1, r2)], [c * u + d * v for u, v in zip(r1, r2)])


def hnf_with_transform(M: Sequence[Sequence[int]]):
    """Row Hermite normal form ``H = U M`` with ``U`` unimodular.

    ``H`` is in row echelon form with positive pivots and the entries above
    each pivot reduced into ``[0, pivot)``.  Returns ``(H, U, pivots)`` where
    the first ``len(pivots)`` rows of ``H`` are nonzero and the rest vanish.
    """
    H = [[int(v) for v in row] for row in M]
    m = len(H)
    n = len(H[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        for i in range(row + 1, m):
            b = H[i][col]
            if b == 0:
                continue
            a = H[row][col]
            g, x, y = _egcd(a, b)
            p, q = -b // g, a // g
            H[row], H[i] = _combine(H[row], H[i], x, y, p, q)
            U[row], U[i] = _combine(U[row], U[i], x, y, p, q)
        if H[row][col] == 0:
            continue
        if H[row][col] < 0:
            H[row] = [-v for v in H[row]]
            U[row] = [-v for v in U[row]]
        piv = H[row][col]
        for k in range(row):
            f = H[k][col] // piv
            if f:
                H[k] = [u - f * v for u, v in zip(H[k], H[row])]
                U[k] = [u - f * v for u, v in zip(U[k], U[row])]
        pivots.append(col)
        row += 1
    return H, U, pivots


def hnf(M: Sequence[Sequence[int]]) -> list[list[int]]:
    """Nonzero rows of the row Hermite normal form (a basis of the row lattice)."""
    if not M:
        return []
    H, _, pivots = hnf_with_transform(M)
    return H[:len(pivots)]


def integer_kernel(A: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Basis of ``{x in Z^N : A x = 0}`` (rows), in Hermite normal form."""
    N = ncols if ncols is not None else (len(A[0]) if A else 0)
    if not A:
        return [[int(i == j) for j in range(N)] for i in range(N)]
    At = [[int(A[i][j]) for i in range(len(A))] for j in range(N)]
    _, U, pivots = hnf_with_transform(At)
    return hnf(U[len(pivots):])


def pivot_columns(H: Sequence[Sequence[int]]) -> list[int]:
    out = []
    for row in H:
        out.append(next(j for j, v in enumerate(row) if v))
    return out


def solve_in_lattice(H: Sequence[Sequence[int]], r: Sequence[int]) -> list[int] | None:
    """Integer coefficients c with ``sum c_i H_i = r`` for an HNF basis, else None."""
    rest = [int(v) for v in r]
    coeffs = []
    for row, col in zip(H, pivot_columns(H)):
        q, rem = divmod(rest[col], row[col])
        if rem:
            return None
        coeffs.append(q)
        if q:
            rest = [u - q * v for u, v in zip(rest, row)]
    return coeffs if not any(rest) else None


def completion_rows(H: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Unit vectors on the non-pivot columns; together with ``H`` they span Q^n."""
    piv = set(pivot_columns(H))
    return [[int(i == j) for i in range(n)] for j in range(n) if j not in piv]
