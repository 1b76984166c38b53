"""P1 finite elements on the structured meshes of `roughwall.geometry`."""
from dataclasses import dataclass

import numpy as np

from ._core import kernels
from .errors import BreakdownError, ConflictError, OutOfDomain
from .linalg import DEFAULT_TOL, SparseMatrix, cg_solve

# 3-point rule, exact for quadratics: barycentric points and equal weights
QUAD_BARY = np.array([[2 / 3, 1 / 6, 1 / 6],
                      [1 / 6, 2 / 3, 1 / 6],
                      [1 / 6, 1 / 6, 2 / 3]])
GAUSS2 = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


@dataclass(frozen=True, eq=False)
class ScalarField:
    mesh: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.mesh.n_vertices,):
            raise ValueError("one value per vertex expected")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", v)

    def __call__(self, points):
        return interpolate(self, points)

    def element_gradients(self):
        return element_gradients(self.mesh, self.values)

    def __add__(self, other):
        return ScalarField(self.mesh, self.values + other.values)

    def __sub__(self, other):
        return ScalarField(self.mesh, self.values - other.values)

    def __mul__(self, s):
        return ScalarField(self.mesh, self.values * s)

    __rmul__ = __mul__


@dataclass(eq=False)
class LinearSystem:
    """Stiffness triplets and load on vertices, plus constraints once applied.

    After `apply_bc`, ``A``/``b`` act on the free degrees of freedom only and
    ``dofmap``, ``free`` and ``fixed_values`` map them back to vertices.
    """

    mesh: object
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    load: np.ndarray
    A: SparseMatrix = None
    b: np.ndarray = None
    dofmap: np.ndarray = None
    free: np.ndarray = None
    fixed_values: np.ndarray = None

    def full_matrix(self):
        n = self.mesh.n_vertices
        return SparseMatrix.from_coo(self.rows, self.cols, self.vals, n)

    def expand(self, x):
        """Free-dof vector -> vertex values."""
        u = self.fixed_values.copy()
        u[self.free] = x
        return u[self.dofmap]


def element_gradients(mesh, values):
    """Constant gradient of the P1 interpolant on each triangle, ``(M, 2)``."""
    p = mesh.vertices[mesh.triangles]
    u = np.asarray(values)[mesh.triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d2[:, 0] * d1[:, 1]
    du1, du2 = u[:, 1] - u[:, 0], u[:, 2] - u[:, 0]
    gx = (du1 * d2[:, 1] - du2 * d1[:, 1]) / det
    gy = (du2 * d1[:, 0] - du1 * d2[:, 0]) / det
    return np.column_stack([gx, gy])


def assemble(mesh, source=0.0, source_region="full"):
    """Stiffness of ``-Δ`` and load of a constant source on a region."""
    ke, area = kernels.p1_stiffness(np.ascontiguousarray(mesh.vertices),
                                    np.ascontiguousarray(mesh.triangles, dtype=np.int64))
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    load = np.zeros(mesh.n_vertices)
    if source:
        mask = mesh.region_mask(source_region)
        np.add.at(load, t[mask].ravel(), np.repeat(source * area[mask] / 3.0, 3))
    return LinearSystem(mesh, rows, cols, ke.ravel(), load)


def _edge_quadrature(mesh, edges, func):
    """Consistent load ``∫ g φ_i`` over edges by 2-point Gauss."""
    a = mesh.vertices[edges[:, 0]]
    b = mesh.vertices[edges[:, 1]]
    length = np.linalg.norm(b - a, axis=1)
    out = np.zeros(mesh.n_vertices)
    for s in GAUSS2:
        pts = a + s * (b - a)
        g = np.broadcast_to(np.asarray(func(pts) if callable(func) else func, float),
                            (len(pts),))
        w = 0.5 * length * g
        np.add.at(out, edges[:, 0], w * (1.0 - s))
        np.add.at(out, edges[:, 1], w * s)
    return out


def apply_bc(sys, dirichlet=(), neumann=(), periodic=False):
    """Constrain ``sys``.

    ``dirichlet`` and ``neumann`` are sequences of ``(tag, data)`` where data
    is a constant or a callable on ``(n, 2)`` points. Neumann data is the
    outward normal derivative. Dirichlet values win at vertices shared with
    Neumann edges. Periodic pairs are merged into their masters.
    """
    mesh = sys.mesh
    n = mesh.n_vertices
    dofmap = mesh.dof_map(periodic)
    load = sys.load.copy()
    for tag, data in neumann:
        load += _edge_quadrature(mesh, mesh.edges[tag], data)

    fixed = np.zeros(n, dtype=bool)
    values = np.zeros(n)
    for tag, data in dirichlet:
        verts = mesh.tagged_vertices(tag)
        val = data(mesh.vertices[verts]) if callable(data) else np.full(len(verts), float(data))
        dofs = dofmap[verts]
        clash = fixed[dofs] & ~np.isclose(values[dofs], val, rtol=1e-12, atol=1e-12)
        if np.any(clash):
            raise ConflictError(f"vertex {verts[clash][0]} gets two Dirichlet values")
        fixed[dofs] = True
        values[dofs] = val
    if not fixed.any():
        raise BreakdownError("no Dirichlet constraint: the stiffness matrix is singular")

    reps = np.unique(dofmap)
    free = reps[~fixed[reps]]
    rhs_full = np.bincount(dofmap, weights=load, minlength=n)
    r, c = dofmap[sys.rows], dofmap[sys.cols]
    Afull = SparseMatrix.from_coo(r, c, sys.vals, n)
    rhs_full -= Afull.matvec(np.where(fixed, values, 0.0))
    out = LinearSystem(mesh, sys.rows, sys.cols, sys.vals, sys.load)
    out.A = Afull.submatrix(free)
    out.b = rhs_full[free]
    out.dofmap = dofmap
    out.free = free
    out.fixed_values = np.where(fixed, values, 0.0)
    return out


def solve(sys, tol=DEFAULT_TOL, max_iter=None):
    """Solve a constrained system and return the vertex field."""
    res = cg_solve(sys.A, sys.b, tol=tol, max_iter=max_iter)
    return ScalarField(sys.mesh, sys.expand(res.x))


def interpolate(field, points, snap=1e-12, outside="raise"):
    """Barycentric P1 evaluation; ``outside`` is ``"raise"``, ``"zero"`` or ``"clamp"``."""
    pts = np.asarray(points, dtype=np.float64)
    shape = pts.shape[:-1]
    tri, bary, inside = field.mesh.locate(pts, snap=snap, clamp=(outside == "clamp"))
    vals = np.einsum("ij,ij->i", bary, field.values[field.mesh.triangles[tri]])
    if outside == "raise" and not inside.all():
        bad = pts.reshape(-1, 2)[~inside][0]
        raise OutOfDomain(f"point {tuple(bad)} outside the mesh")
    if outside == "zero":
        vals = np.where(inside, vals, 0.0)
    return vals.reshape(shape) if shape else float(vals[0])


def quadrature_points(mesh, region="full"):
    """``(points (m, 3, 2), weights (m, 3), triangle ids)`` of the 3-point rule."""
    mask = mesh.region_mask(region)
    ids = np.flatnonzero(mask)
    p = mesh.vertices[mesh.triangles[ids]]
    pts = np.einsum("qk,mkd->mqd", QUAD_BARY, p)
    w = np.repeat(mesh.areas[ids][:, None] / 3.0, 3, axis=1)
    return pts, w, ids


def norm_on_region(field=None, region="full", kind="L2", analytic=None,
                   analytic_grad=None, mesh=None):
    """Norm of ``field - analytic`` over a region of the mesh.

    ``kind`` is ``"L2"``, ``"H1semi"`` or ``"H1"``. ``analytic`` maps
    ``(n, 2)`` points to values and ``analytic_grad`` to ``(n, 2)`` gradients;
    either may be omitted (treated as zero).
    """
    mesh = field.mesh if field is not None else mesh
    pts, w, ids = quadrature_points(mesh, region)
    flat = pts.reshape(-1, 2)
    total = 0.0
    if kind in ("L2", "H1"):
        v = np.zeros(flat.shape[0])
        if field is not None:
            v += np.einsum("qk,mk->mq", QUAD_BARY,
                           field.values[mesh.triangles[ids]]).ravel()
        if analytic is not None:
            v -= np.asarray(analytic(flat)).ravel()
        total += float(np.sum(w.ravel() * v * v))
    if kind in ("H1semi", "H1"):
        g = np.zeros_like(flat)
        if field is not None:
            g += np.repeat(element_gradients(mesh, field.values)[ids], 3, axis=0)
        if analytic_grad is not None:
            g -= np.asarray(analytic_grad(flat)).reshape(-1, 2)
        total += float(np.sum(w.ravel() * np.sum(g * g, axis=1)))
    if kind not in ("L2", "H1semi", "H1"):
        raise ValueError(f"unknown norm kind {kind!r}")
    return float(np.sqrt(total))


def recovered_gradient(mesh, values, vertices, periodic=True):
    """Area-weighted average of element gradients around ``vertices``.

    Periodic images are merged, so a vertex on the cell side collects the
    elements on both sides of the period line.
    """
    grads = element_gradients(mesh, values)
    dofmap = mesh.dof_map(periodic)
    t = dofmap[mesh.triangles]
    wsum = np.zeros(mesh.n_vertices)
    gsum = np.zeros((mesh.n_vertices, 2))
    a = mesh.areas
    for k in range(3):
        np.add.at(wsum, t[:, k], a)
        np.add.at(gsum, t[:, k], grads * a[:, None])
    v = dofmap[np.asarray(vertices)]
    return gsum[v] / wsum[v][:, None]
