"""Sparse SPD linear algebra: CSR storage and Jacobi-preconditioned CG."""
from dataclasses import dataclass

import numpy as np

from ._core import kernels
from .errors import BreakdownError, NonConvergence

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SparseMatrix:
    """Square CSR matrix with sorted, unique column indices per row."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_coo(cls, rows, cols, vals, n):
        """Build from triplets, summing duplicates."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size == 0:
            return cls(n, np.zeros(n + 1, dtype=np.int64),
                       np.zeros(0, dtype=np.int64), np.zeros(0))
        key = rows * n + cols
        order = np.argsort(key, kind="stable")
        key = key[order]
        start = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        summed = np.add.reduceat(vals[order], start)
        ukey = key[start]
        r, c = np.divmod(ukey, n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=n), out=offsets[1:])
        return cls(n, offsets, c.astype(np.int64), summed)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=np.float64)
        r, c = np.nonzero(a)
        return cls.from_coo(r, c, a[r, c], a.shape[0])

    @property
    def nnz(self):
        return int(self.values.size)

    def matvec(self, x):
        return kernels.csr_matvec(self.row_offsets, self.col_indices,
                                  self.values, np.ascontiguousarray(x, dtype=np.float64))

    __matmul__ = matvec

    def diagonal(self):
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        d = np.zeros(self.n)
        on = rows == self.col_indices
        d[rows[on]] = self.values[on]
        return d

    def toarray(self):
        a = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        a[rows, self.col_indices] = self.values
        return a

    def transpose(self):
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        return SparseMatrix.from_coo(self.col_indices, rows, self.values, self.n)

    def is_symmetric(self, rtol=1e-12):
        t = self.transpose()
        if not (np.array_equal(t.row_offsets, self.row_offsets)
                and np.array_equal(t.col_indices, self.col_indices)):
            return False
        scale = np.max(np.abs(self.values), initial=0.0)
        return bool(np.all(np.abs(t.values - self.values) <= rtol * scale))

    def submatrix(self, keep):
        """Principal submatrix on the index array ``keep``."""
        keep = np.asarray(keep, dtype=np.int64)
        newidx = np.full(self.n, -1, dtype=np.int64)
        newidx[keep] = np.arange(keep.size)
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        r, c = newidx[rows], newidx[self.col_indices]
        m = (r >= 0) & (c >= 0)
        return SparseMatrix.from_coo(r[m], c[m], self.values[m], keep.size)


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def cg_solve(A, b, tol=DEFAULT_TOL, max_iter=None, x0=None):
    """Solve ``A x = b`` by Jacobi-preconditioned conjugate gradients.

    Stops when ``||b - A x||_2 <= tol * ||b||_2``. Raises `NonConvergence`
    if ``max_iter`` (default ``20 n``) is reached first and `BreakdownError`
    on a non-positive ``p^T A p``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.ascontiguousarray(b, dtype=np.float64)
    if max_iter is None:
        max_iter = 20 * max(A.n, 1)
    x = np.zeros(A.n) if x0 is None else np.array(x0, dtype=np.float64)
    status, it, res = kernels.pcg(A.row_offsets, A.col_indices, A.values,
                                  b, x, float(tol), int(max_iter))
    if status == 2:
        raise BreakdownError(f"p^T A p <= 0 at iteration {it}; matrix not SPD")
    if status == 1:
        raise NonConvergence(f"CG stalled at relative residual {res:.3e} "
                             f"after {it} iterations", it, res)
    return CGResult(x, int(it), float(res))
