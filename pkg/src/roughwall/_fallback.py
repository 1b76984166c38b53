"""Pure numpy versions of the compiled kernels, same signatures."""
import numpy as np


def csr_matvec(indptr, indices, data, x):
    prod = data * x[indices]
    out = np.zeros(len(indptr) - 1)
    nonempty = indptr[:-1] < indptr[1:]
    out[nonempty] = np.add.reduceat(prod, indptr[:-1][nonempty])
    return out


def pcg(indptr, indices, data, b, x, tol, max_iter):
    n = len(b)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    diag = np.zeros(n)
    on_diag = rows == indices
    diag[rows[on_diag]] = data[on_diag]
    dinv = np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), 1.0)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        x[:] = 0.0
        return 0, 0, 0.0
    r = b - csr_matvec(indptr, indices, data, x)
    z = dinv * r
    p = z.copy()
    rz = r @ z
    rr = r @ r
    it = 0
    while True:
        if np.sqrt(rr) <= tol * bnorm:
            return 0, it, np.sqrt(rr) / bnorm
        if it >= max_iter:
            return 1, it, np.sqrt(rr) / bnorm
        q = csr_matvec(indptr, indices, data, p)
        pap = p @ q
        if pap <= 0.0:
            return 2, it, np.sqrt(rr) / bnorm
        alpha = rz / pap
        x += alpha * p
        r -= alpha * q
        z = dinv * r
        rz_new = r @ z
        rr = r @ r
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1


def p1_stiffness(vertices, triangles):
    p = vertices[triangles]
    bx = np.stack([p[:, 1, 1] - p[:, 2, 1], p[:, 2, 1] - p[:, 0, 1],
                   p[:, 0, 1] - p[:, 1, 1]], axis=1)
    by = np.stack([p[:, 2, 0] - p[:, 1, 0], p[:, 0, 0] - p[:, 2, 0],
                   p[:, 1, 0] - p[:, 0, 0]], axis=1)
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - \
        (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    ke = (bx[:, :, None] * bx[:, None, :] + by[:, :, None] * by[:, None, :]) \
        / (2.0 * det)[:, None, None]
    return ke, 0.5 * det
