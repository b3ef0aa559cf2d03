import itertools

from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from ncgpi1.lattice import completion_rows, hnf, hnf_with_transform, integer_kernel, solve_in_lattice

int_matrices = st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=1, max_size=4))


def _same_lattice(A, B):
    """Row lattices agree iff sympy's canonical HNFs of the transposes agree."""
    if not A or not B:
        return not any(any(r) for r in A) and not any(any(r) for r in B)
    return hermite_normal_form(Matrix(A).T) == hermite_normal_form(Matrix(B).T)


def test_small_example():
    assert hnf([[2, 4, 6], [1, 3, 5], [0, 0, 7]]) == [[1, 1, 1], [0, 2, 4], [0, 0, 7]]
    assert hnf([[2, 4, 6], [1, 2, 3]]) == [[1, 2, 3]]


@given(int_matrices)
def test_hnf_shape_and_transform(M):
    H, U, piv = hnf_with_transform(M)
    n = len(M[0])
    # H = U M with U unimodular
    assert [[sum(U[i][k] * M[k][j] for k in range(len(M))) for j in range(n)] for i in range(len(M))] == H
    assert abs(Matrix(U).det()) == 1
    for r, c in enumerate(piv):
        assert H[r][c] > 0 and all(v == 0 for v in H[r][:c])
        assert all(0 <= H[k][c] < H[r][c] for k in range(r))
    assert all(not any(row) for row in H[len(piv):])


@given(int_matrices)
def test_hnf_spans_the_same_lattice_as_sympy(M):
    H = hnf(M)
    if any(any(r) for r in M):
        assert _same_lattice(H, M)
    else:
        assert H == []


@given(int_matrices)
def test_hnf_is_idempotent(M):
    H = hnf(M)
    assert hnf(H) == H if H else True


@given(int_matrices)
def test_kernel(M):
    n = len(M[0])
    K = integer_kernel(M, n)
    for v in K:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in M)
    rank = Matrix(M).rank()
    assert len(K) == n - rank
    # every small integer solution lies in the kernel lattice
    for v in itertools.product(range(-2, 3), repeat=n):
        if all(sum(a * b for a, b in zip(row, v)) == 0 for row in M):
            assert solve_in_lattice(K, v) is not None


def test_solve_and_completion():
    H = hnf([[2, 0], [0, 3]])
    assert solve_in_lattice(H, [4, 6]) == [2, 2]
    assert solve_in_lattice(H, [1, 0]) is None
    assert completion_rows(hnf([[0, 0, 5]]), 3) == [[1, 0, 0], [0, 1, 0]]
