"""Vertical corrector on the rough quarter-plane.

``ξ`` is harmonic in ``Π = {y1 > 0, y2 > f(y1)}``, vanishes on the rough
bottom and copies the normal derivative of the cell corrector β on the
vertical edge ``y1 = 0``. It cancels the flux that the periodic boundary
layer leaks onto the inlet; its mirror image does the same at the outlet.
The domain is truncated at ``n_periods`` cells and height ``Y`` with a
homogeneous Dirichlet closure.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .cell import neumann_trace_g
from .errors import InsufficientDomain
from .fem import ScalarField, apply_bc, assemble, element_gradients, interpolate, norm_on_region
from .geometry import TWO_PI, build_quarter_mesh
from .linalg import cg_solve

ALPHA0 = math.sqrt(2.0) / math.pi


@dataclass(frozen=True)
class DecayParameters:
    alpha: float = 0.4
    M: float = 4.9

    def __post_init__(self):
        if not 0.0 < self.alpha < ALPHA0:
            raise ValueError(f"alpha must lie in ]0, {ALPHA0:.5f}[")
        if not 0.0 < self.M < 1.0 / (1.0 - 2.0 * self.alpha):
            raise ValueError("M must satisfy 0 < M < 1/(1 - 2 alpha)")

    @property
    def alpha0(self):
        return ALPHA0

    @property
    def radial_bound(self):
        """Exponent of the pointwise bound ``|ξ| <= K ρ^-(1 - 1/(2M))``."""
        return -(1.0 - 1.0 / (2.0 * self.M))

    @property
    def line_bound(self):
        """Exponent of ``∫ |∂ξ/∂y1|² dy1 <= K y2^-(1 + 2α)``."""
        return -(1.0 + 2.0 * self.alpha)


def rho(points):
    p = np.asarray(points)
    return np.hypot(p[..., 0], p[..., 1] + 1.0)


@dataclass(frozen=True, eq=False)
class CorrectorSolution:
    xi: ScalarField
    n_periods: int
    Y: float
    mirror: bool = False

    @property
    def mesh(self):
        return self.xi.mesh

    @property
    def width(self):
        return TWO_PI * self.n_periods

    def h1_norm(self):
        return norm_on_region(self.xi, "full", "H1")

    def h1_seminorm(self):
        return norm_on_region(self.xi, "full", "H1semi")


def solve_xi(cell, n_periods=10, Y=20.0, ppp=32, n2=8, n_sub=None, tol=1e-11,
             max_iter=None, scale=1.0):
    """Quarter-plane corrector for ``cell`` (uses its own, possibly mirrored, profile).

    On the edge ``y1 = 0`` the outward normal is ``-e1``; matching
    ``∂ξ/∂n = ∂β/∂n`` means ``∂ξ/∂y1 = g``, i.e. an outward flux ``-g``.
    """
    mesh = build_quarter_mesh(cell.profile, n_periods, Y, ppp, n2, n_sub)
    flux = lambda q: -scale * neumann_trace_g(cell, np.maximum(q[:, 1], cell.g_minus_y2[0]))
    sysbc = apply_bc(assemble(mesh), dirichlet=[("QuarterB", 0.0), ("QuarterFar", 0.0)],
                     neumann=[("QuarterE", flux)])
    res = cg_solve(sysbc.A, sysbc.b, tol=tol, max_iter=max_iter)
    return CorrectorSolution(ScalarField(mesh, sysbc.expand(res.x)), n_periods, Y,
                             mirror=cell.mirror)


def solve_xi_pair(cell, **kw):
    """``(ξ_in, ξ_out)``: the outlet corrector solves the mirrored problem."""
    return solve_xi(cell, **kw), solve_xi(cell.mirrored(), **kw)


def eval_xi(sol, points):
    """ξ inside the truncated quarter-plane, zero elsewhere."""
    return interpolate(sol.xi, points, snap=1e-10, outside="zero")


def xi_gradient(sol, points):
    """Element gradient of ξ at points, zero outside."""
    pts = np.asarray(points, dtype=np.float64)
    flat = pts.reshape(-1, 2)
    tri, _, inside = sol.mesh.locate(flat, snap=1e-10)
    g = element_gradients(sol.mesh, sol.xi.values)[tri]
    g[~inside] = 0.0
    return g.reshape(pts.shape)


@dataclass
class DecayReport:
    radial_exponent: float
    line_exponent: float
    shells: list = field(default_factory=list)   # (rho_lo, rho_hi, max |ξ|)
    lines: list = field(default_factory=list)    # (y2, ∫ |∂ξ/∂y1|² dy1)
    no_data: bool = False


NO_DECAY_DATA = DecayReport(float("nan"), float("nan"), no_data=True)


def _fit(x, y):
    A = np.column_stack([np.log(x), np.ones(len(x))])
    return float(np.linalg.lstsq(A, np.log(y), rcond=None)[0][0])


def line_integral(sol, y2, samples_per_column=4):
    """``∫ |∂ξ/∂y1|² dy1`` along the horizontal line at height ``y2``."""
    g = sol.mesh.grid
    n = g.nx * samples_per_column
    # midpoint rule on sub-intervals; the integrand is piecewise constant
    y1 = (np.arange(n) + 0.5) * (g.nx * g.hx / n)
    grad = xi_gradient(sol, np.column_stack([y1, np.full(n, y2)]))
    return float(np.sum(grad[:, 0] ** 2) * (g.nx * g.hx / n))


def decay_report(sol, params=DecayParameters(), shells=(2.0, 4.0, 8.0, 16.0),
                 lines=(2.0, 4.0, 8.0), far_margin=0.2):
    """Fit decay exponents of ξ: shell maxima against ρ and line integrals against y2."""
    v = sol.xi.values
    if np.max(np.abs(v)) < 1e-14:
        return NO_DECAY_DATA
    verts = sol.mesh.vertices
    r = rho(verts)
    usable = (verts[:, 0] <= (1 - far_margin) * sol.width) & \
             (verts[:, 1] <= (1 - far_margin) * sol.Y)
    shell_rows = []
    for lo in shells:
        sel = usable & (r >= lo) & (r < 2 * lo)
        if sel.sum() >= 3:
            shell_rows.append((lo, 2 * lo, float(np.max(np.abs(v[sel])))))
    if len(shell_rows) < 3:
        raise InsufficientDomain("fewer than 3 shells clear of the far boundary")
    centers = np.array([math.sqrt(a * b) for a, b, _ in shell_rows])
    radial = _fit(centers, np.array([m for _, _, m in shell_rows]))

    line_rows = [(y, line_integral(sol, y)) for y in lines
                 if y <= (1 - far_margin) * sol.Y]
    if len(line_rows) < 2:
        raise InsufficientDomain("fewer than 2 line samples below the far boundary")
    line = _fit(np.array([a for a, _ in line_rows]), np.array([b for _, b in line_rows]))
    return DecayReport(radial, line, shell_rows, line_rows)


def l2_on_box(sol, width, height, samples=None):
    """``‖ξ‖_{L²}`` on ``[0, width] x [f, height]`` via the mesh quadrature."""
    from .fem import quadrature_points
    pts, w, ids = quadrature_points(sol.mesh)
    c = sol.mesh.vertices[sol.mesh.triangles[ids]].mean(axis=1)
    keep = (c[:, 0] < width) & (c[:, 1] < height)
    vals = interpolate(sol.xi, pts[keep].reshape(-1, 2), snap=1e-9)
    return float(np.sqrt(np.sum(w[keep].ravel() * vals ** 2)))
