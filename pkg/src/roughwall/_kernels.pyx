# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: CSR products, Jacobi-PCG and P1 element stiffness."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def csr_matvec(const long[::1] indptr, const long[::1] indices,
               const double[::1] data, const double[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i, k
    cdef double s
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += data[k] * x[indices[k]]
            y[i] = s
    return out


cdef inline void _matvec(const long[::1] indptr, const long[::1] indices,
                         const double[::1] data, double[::1] x,
                         double[::1] y) noexcept nogil:
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double s
    for i in range(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * x[indices[k]]
        y[i] = s


def pcg(const long[::1] indptr, const long[::1] indices,
        const double[::1] data, const double[::1] b, double[::1] x,
        double tol, long max_iter):
    """Jacobi-preconditioned CG, in place on ``x``.

    Returns ``(status, iterations, relative_residual)`` with status 0 on
    convergence, 1 when ``max_iter`` is exhausted and 2 on ``p^T A p <= 0``.
    """
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, k
    cdef long it = 0
    cdef int status = 1
    cdef double rz, rz_new, pap, alpha, beta, rr, bnorm, d
    r_a = np.empty(n); z_a = np.empty(n); p_a = np.empty(n)
    q_a = np.empty(n); dinv_a = np.empty(n)
    cdef double[::1] r = r_a, z = z_a, p = p_a, q = q_a, dinv = dinv_a
    with nogil:
        for i in range(n):
            d = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                if indices[k] == i:
                    d = data[k]
            dinv[i] = 1.0 / d if d > 0.0 else 1.0
        bnorm = 0.0
        for i in range(n):
            bnorm += b[i] * b[i]
        bnorm = sqrt(bnorm)
        if bnorm == 0.0:
            for i in range(n):
                x[i] = 0.0
            status = 0
        else:
            _matvec(indptr, indices, data, x, q)
            rr = 0.0
            rz = 0.0
            for i in range(n):
                r[i] = b[i] - q[i]
                z[i] = dinv[i] * r[i]
                p[i] = z[i]
                rz += r[i] * z[i]
                rr += r[i] * r[i]
            while True:
                if sqrt(rr) <= tol * bnorm:
                    status = 0
                    break
                if it >= max_iter:
                    status = 1
                    break
                _matvec(indptr, indices, data, p, q)
                pap = 0.0
                for i in range(n):
                    pap += p[i] * q[i]
                if pap <= 0.0:
                    status = 2
                    break
                alpha = rz / pap
                rr = 0.0
                rz_new = 0.0
                for i in range(n):
                    x[i] += alpha * p[i]
                    r[i] -= alpha * q[i]
                    z[i] = dinv[i] * r[i]
                    rz_new += r[i] * z[i]
                    rr += r[i] * r[i]
                beta = rz_new / rz
                rz = rz_new
                for i in range(n):
                    p[i] = z[i] + beta * p[i]
                it += 1
    return status, it, (sqrt(rr) / bnorm if bnorm > 0.0 else 0.0)


def p1_stiffness(const double[:, ::1] vertices, const long[:, ::1] triangles):
    """Element stiffness blocks ``(M, 3, 3)`` and signed areas ``(M,)``."""
    cdef Py_ssize_t m = triangles.shape[0]
    ke_a = np.empty((m, 3, 3)); area_a = np.empty(m)
    cdef double[:, :, ::1] ke = ke_a
    cdef double[::1] area = area_a
    cdef Py_ssize_t e, a, c
    cdef double x0, y0, x1, y1, x2, y2, det
    cdef double bx[3]
    cdef double by[3]
    with nogil:
        for e in range(m):
            x0 = vertices[triangles[e, 0], 0]; y0 = vertices[triangles[e, 0], 1]
            x1 = vertices[triangles[e, 1], 0]; y1 = vertices[triangles[e, 1], 1]
            x2 = vertices[triangles[e, 2], 0]; y2 = vertices[triangles[e, 2], 1]
            det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
            area[e] = 0.5 * det
            bx[0] = y1 - y2; bx[1] = y2 - y0; bx[2] = y0 - y1
            by[0] = x2 - x1; by[1] = x0 - x2; by[2] = x1 - x0
            for a in range(3):
                for c in range(3):
                    ke[e, a, c] = (bx[a] * bx[c] + by[a] * by[c]) / (2.0 * det)
    return ke_a, area_a
