"""Periodic cell problems for the first (β) and second (τ) order boundary layers.

Both solve ``-Δw = 0`` on the truncated cell ``{f(y1) < y2 < Y}``, periodic in
``y1``, with ``w = -y2`` (β) or ``w = -y2²`` (τ) on the rough bottom and a
homogeneous Neumann closure at ``y2 = Y``. Above the interface ``y2 = 0`` the
solution is the harmonic extension

    w(y) = Σ_k c_k exp(i k y1 - |k| y2),

whose coefficients ``c_k`` are the Fourier coefficients of the interface
trace, normalised as averages so that ``c_0`` is the mean.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .fem import ScalarField, apply_bc, assemble, interpolate, recovered_gradient
from .geometry import TWO_PI, build_cell_mesh
from .linalg import DEFAULT_TOL, cg_solve


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Coefficients ``c_k`` for ``k = -K..K`` of a harmonic function in ``y2 > 0``."""

    coeffs: np.ndarray

    @property
    def K(self):
        return (len(self.coeffs) - 1) // 2

    @property
    def k(self):
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k):
        return self.coeffs[k + self.K]

    @property
    def mean(self):
        return float(self[0].real)

    @classmethod
    def from_modes(cls, modes, K=None):
        """Build from a ``{k: c_k}`` mapping."""
        K = max(abs(k) for k in modes) if K is None else K
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            c[k + K] = v
        return cls(c)

    def mirrored(self):
        """Coefficients of ``y1 -> w(-y1)``."""
        return Spectrum(self.coeffs[::-1].copy())

    def _positive(self, y1, y2):
        """``Σ_{k≠0}`` through powers of ``exp(i y1 - y2)``."""
        z = np.exp(1j * y1 - y2)
        zk = np.ones_like(z)
        pos = np.zeros_like(z)
        for k in range(1, self.K + 1):
            zk = zk * z
            # conj(z)^k = exp(-i k y1 - k y2)
            pos = pos + self[k] * zk + self[-k] * np.conj(zk)
        return pos

    def evaluate(self, points):
        pts = np.asarray(points, dtype=np.float64)
        y1, y2 = pts[..., 0], pts[..., 1]
        if np.any(y2 < 0.0):
            raise DomainError("spectral representation holds for y2 >= 0 only")
        pos = self._positive(y1, y2)
        return (self[0] + pos).real

    def gradient(self, points):
        pts = np.asarray(points, dtype=np.float64)
        y1, y2 = pts[..., 0], pts[..., 1]
        if np.any(y2 < 0.0):
            raise DomainError("spectral representation holds for y2 >= 0 only")
        z = np.exp(1j * y1 - y2)
        zk = np.ones_like(z)
        g1 = np.zeros(z.shape)
        g2 = np.zeros(z.shape)
        for k in range(1, self.K + 1):
            zk = zk * z
            a = self[k] * zk
            b = self[-k] * np.conj(zk)
            g1 = g1 + (1j * k * (a - b)).real
            g2 = g2 - (k * (a + b)).real
        return np.stack([g1, g2], axis=-1)

    def tail_fraction(self):
        """Share of ``Σ|c_k|²`` carried by ``|k| > K/2``."""
        w = np.abs(self.coeffs) ** 2
        return float(w[np.abs(self.k) > self.K / 2].sum() / w.sum())


@dataclass(frozen=True, eq=False)
class CellField:
    field: ScalarField
    average: float
    spectrum: Spectrum


@dataclass(frozen=True, eq=False)
class CellSolution:
    profile: object
    Y: float
    beta: ScalarField
    beta_bar: float
    eta: Spectrum
    tau: ScalarField = None
    tau_bar: float = None
    tau_spectrum: Spectrum = None
    g_minus_y2: np.ndarray = None      # sample heights on [f(0), 0]
    g_minus: np.ndarray = None         # ∂β/∂y1 at (0, y2)
    mirror: bool = False               # values are read at (-y1, y2)

    @property
    def mesh(self):
        return self.beta.mesh

    def mirrored(self):
        """Cell solution of the profile ``f(-y1)``: ``β(-y1, y2)``."""
        return replace(self, profile=self.profile.mirrored(), eta=self.eta.mirrored(),
                       tau_spectrum=None if self.tau_spectrum is None
                       else self.tau_spectrum.mirrored(),
                       g_minus=None if self.g_minus is None else -self.g_minus,
                       mirror=not self.mirror)

    def _cell_coords(self, points):
        pts = np.array(points, dtype=np.float64).reshape(-1, 2)
        y1 = -pts[:, 0] if self.mirror else pts[:, 0]
        pts[:, 0] = np.mod(y1, TWO_PI)
        return pts

    def beta_at(self, points):
        """β at micro points anywhere above the rough bottom (periodic in ``y1``).

        Spectral above the interface, P1 interpolation in the sublayer.
        """
        return self._eval(points, self.beta, self.eta)

    def tau_at(self, points):
        return self._eval(points, self.tau, self.tau_spectrum)

    def _eval(self, points, fld, spec):
        pts = np.asarray(points, dtype=np.float64)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, 2)
        out = np.empty(len(flat))
        up = flat[:, 1] >= 0.0
        out[up] = spec.evaluate(flat[up])
        if (~up).any():
            out[~up] = interpolate(fld, self._cell_coords(flat[~up]), outside="clamp")
        return out.reshape(shape)

    def beta_grad_at(self, points):
        pts = np.asarray(points, dtype=np.float64)
        flat = pts.reshape(-1, 2)
        out = np.empty_like(flat)
        up = flat[:, 1] >= 0.0
        out[up] = self.eta.gradient(flat[up])
        if (~up).any():
            mesh = self.mesh
            tri, _, _ = mesh.locate(self._cell_coords(flat[~up]), clamp=True)
            g = self.beta.element_gradients()[tri]
            if self.mirror:
                g[:, 0] = -g[:, 0]
            out[~up] = g
        return out.reshape(pts.shape)


def _cell_system(mesh):
    return assemble(mesh)


def _solve_cell_data(mesh, power, tol, max_iter, system=None):
    sysbc = apply_bc(system or _cell_system(mesh),
                     dirichlet=[("CellBottom", lambda q: -q[:, 1] ** power)],
                     periodic=True)
    res = cg_solve(sysbc.A, sysbc.b, tol=tol, max_iter=max_iter)
    return ScalarField(mesh, sysbc.expand(res.x))


def interface_trace(fld):
    """Nodal values on ``y2 = 0`` for ``y1 = 2π j / ppp``, ``j < ppp``."""
    g = fld.mesh.grid
    return fld.values[g.nb * (g.nx + 1) + np.arange(g.nx)]


def extract_eta(fld, K_max=None):
    """Average-normalised Fourier coefficients of the interface trace."""
    trace = interface_trace(fld)
    n = len(trace)
    K = n // 2 - 1 if K_max is None else K_max
    if K > n // 2 - 1:
        raise ValueError("K_max must stay below the sampling Nyquist limit")
    c = np.fft.fft(trace) / n
    k = np.arange(-K, K + 1)
    return Spectrum(c[np.mod(k, n)])


def _cell_field(mesh, power, tol, max_iter, K_max, system=None):
    fld = _solve_cell_data(mesh, power, tol, max_iter, system)
    spec = extract_eta(fld, K_max)
    return CellField(fld, float(np.mean(interface_trace(fld))), spec)


def solve_beta(p, Y=10.0, ppp=64, n2=16, n_sub=None, tol=1e-12, max_iter=None,
               K_max=None):
    mesh = build_cell_mesh(p, Y, ppp, n2, n_sub)
    return _cell_field(mesh, 1, tol, max_iter, K_max)


def solve_tau(p, Y=10.0, ppp=64, n2=16, n_sub=None, tol=1e-12, max_iter=None,
              K_max=None):
    mesh = build_cell_mesh(p, Y, ppp, n2, n_sub)
    return _cell_field(mesh, 2, tol, max_iter, K_max)


def _g_minus_samples(fld):
    mesh = fld.mesh
    g = mesh.grid
    rows = np.arange(g.nb + 1)
    verts = rows * (g.nx + 1)
    grad = recovered_gradient(mesh, fld.values, verts, periodic=True)
    return mesh.vertices[verts, 1], grad[:, 0]


def solve_cell(p, Y=10.0, ppp=64, n2=16, n_sub=None, tol=1e-12, max_iter=None,
               K_max=None):
    """Solve both cell problems on one mesh and collect everything downstream needs."""
    mesh = build_cell_mesh(p, Y, ppp, n2, n_sub)
    system = _cell_system(mesh)
    beta = _cell_field(mesh, 1, tol, max_iter, K_max, system)
    tau = _cell_field(mesh, 2, tol, max_iter, K_max, system)
    y2, gm = _g_minus_samples(beta.field)
    return CellSolution(p, Y, beta.field, beta.average, beta.spectrum,
                        tau.field, tau.average, tau.spectrum, y2, gm)


def eval_beta_spectral(eta, points):
    return eta.evaluate(points)


def oscillation_l2(eta, spec):
    """``‖β(·/ε) - β̄‖`` in ``L²(Ω⁰)`` by Parseval, ``Ω⁰ = ]0, L[ x ]0, 1[``."""
    eps = spec.epsilon
    k = eta.k
    nz = k != 0
    ak = np.abs(k[nz]).astype(float)
    sq = spec.L * np.sum(np.abs(eta.coeffs[nz]) ** 2 * (eps / (2 * ak))
                         * (-np.expm1(-2 * ak / eps)))
    return float(np.sqrt(sq))


def g_plus(eta, y2):
    """``Re Σ i k η_k exp(-|k| y2)``: ``∂β/∂y1`` on ``y1 = 0`` above the interface."""
    y2 = np.asarray(y2, dtype=np.float64)
    k = eta.k
    terms = (1j * k * eta.coeffs)[None, :] * np.exp(-np.abs(k)[None, :] * y2.reshape(-1, 1))
    return terms.sum(axis=1).real.reshape(y2.shape)


def neumann_trace_g(sol, y2):
    """``g(y2) = ∂β/∂y1 (0, y2)``: spectral above 0, recovered gradient below."""
    y2 = np.asarray(y2, dtype=np.float64)
    f0 = sol.g_minus_y2[0]
    if np.any(y2 < f0 - 1e-12):
        raise DomainError(f"g is defined for y2 >= f(0) = {f0:.6g}")
    out = np.empty(y2.shape)
    up = y2 > 0.0
    out[up] = g_plus(sol.eta, y2[up])
    out[~up] = np.interp(y2[~up], sol.g_minus_y2, sol.g_minus)
    return out if out.ndim else float(out)


__all__ = ["Spectrum", "CellField", "CellSolution", "solve_beta", "solve_tau",
           "solve_cell", "extract_eta", "eval_beta_spectral", "oscillation_l2",
           "g_plus", "neumann_trace_g", "interface_trace", "DEFAULT_TOL"]
