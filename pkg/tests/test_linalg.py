import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from roughwall.errors import BreakdownError, NonConvergence
from roughwall.linalg import SparseMatrix, cg_solve


def test_identity():
    A = SparseMatrix.from_dense(np.eye(3))
    assert np.allclose(cg_solve(A, [1.0, 2.0, 3.0]).x, [1, 2, 3], atol=1e-14)


def test_two_by_two():
    A = SparseMatrix.from_dense([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(cg_solve(A, [3.0, 3.0]).x, [1, 1], atol=1e-12)


def test_poisson_1d_against_dense_solver():
    n, h = 50, 1.0 / 51
    main, off = 2.0 * np.ones(n), -np.ones(n - 1)
    dense = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    A = SparseMatrix.from_dense(dense)
    b = h * h * np.ones(n)
    x = cg_solve(A, b, tol=1e-13).x
    assert np.max(np.abs(x - np.linalg.solve(dense, b))) <= 1e-8


def test_zero_rhs_returns_zero():
    A = SparseMatrix.from_dense(np.eye(4) * 3)
    res = cg_solve(A, np.zeros(4))
    assert np.all(res.x == 0.0) and res.iterations == 0


def test_indefinite_breaks_down():
    A = SparseMatrix.from_dense([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(BreakdownError):
        cg_solve(A, [0.0, 1.0])


def test_iteration_cap():
    n = 40
    dense = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    with pytest.raises(NonConvergence) as exc:
        cg_solve(SparseMatrix.from_dense(dense), np.ones(n), tol=1e-14, max_iter=3)
    assert exc.value.iterations == 3


def test_from_coo_sums_duplicates():
    A = SparseMatrix.from_coo([0, 0, 1, 0], [0, 0, 1, 1], [1.0, 2.0, 5.0, 4.0], 2)
    assert np.array_equal(A.toarray(), [[3.0, 4.0], [0.0, 5.0]])
    assert not A.is_symmetric()
    assert np.array_equal(A.diagonal(), [3.0, 5.0])


def test_submatrix():
    d = np.arange(16.0).reshape(4, 4)
    A = SparseMatrix.from_dense(d)
    assert np.array_equal(A.submatrix([1, 3]).toarray(), d[np.ix_([1, 3], [1, 3])])


# -- property tests ---------------------------------------------------------

@st.composite
def spd_systems(draw):
    n = draw(st.integers(2, 12))
    m = draw(hnp.arrays(np.float64, (n, n), elements=st.floats(-1, 1)))
    # sparsify, then make SPD by diagonal dominance
    mask = draw(hnp.arrays(np.bool_, (n, n)))
    m = np.where(mask, m, 0.0)
    a = m + m.T
    a += np.diag(np.abs(a).sum(axis=1) + draw(st.floats(0.1, 2.0)))
    b = draw(hnp.arrays(np.float64, n, elements=st.floats(-10, 10)))
    return a, b


@settings(max_examples=60, deadline=None)
@given(spd_systems())
def test_cg_matches_dense_on_spd(system):
    a, b = system
    A = SparseMatrix.from_dense(a)
    assert A.is_symmetric()
    x = cg_solve(A, b, tol=1e-12).x
    assert np.allclose(a @ x, b, atol=1e-9 * max(1.0, np.abs(b).max()))


@settings(max_examples=60, deadline=None)
@given(spd_systems(), st.randoms(use_true_random=False))
def test_cg_permutation_equivariant(system, rnd):
    a, b = system
    n = len(b)
    perm = np.array(rnd.sample(range(n), n))
    x = cg_solve(SparseMatrix.from_dense(a), b, tol=1e-13).x
    xp = cg_solve(SparseMatrix.from_dense(a[np.ix_(perm, perm)]), b[perm], tol=1e-13).x
    assert np.allclose(xp, x[perm], atol=1e-9 * max(1.0, np.abs(x).max()))


@settings(max_examples=40, deadline=None)
@given(spd_systems())
def test_matvec_matches_dense(system):
    a, b = system
    assert np.allclose(SparseMatrix.from_dense(a) @ b, a @ b, atol=1e-12)
