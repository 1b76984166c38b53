"""Rough profiles and structured two-block meshes.

All meshes share one layout: ``nx + 1`` node columns at uniform spacing, a
lower block mapped onto the rough bottom (rows ``y = b(x) (1 - s)``) and an
upper block of horizontal rows. The row shared by the two blocks is the
fictitious interface ``y = 0``. Quads are split into two triangles, either
all along the same diagonal (``"uniform"``) or mirrored about the middle of
every roughness period (``"mirror"``), which makes the discrete problem
exactly invariant under ``y1 -> -y1`` for even profiles.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .errors import InvalidGeometry

TWO_PI = 2.0 * math.pi
GRADING_RATIO = 1.15
GRADING_REF_N2 = 8
_SAMPLES = 4096


@dataclass(frozen=True)
class RoughProfile:
    """2π-periodic roughness ``f(y1) = mean + Σ a_j cos(j y1) + Σ b_j sin(j y1)``.

    ``cos_coeffs[0]`` and ``sin_coeffs[0]`` multiply the first harmonic.
    The graph must stay strictly inside ``]-1, 0[``.
    """

    mean: float
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    lipschitz: float = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))
        y = np.linspace(0.0, TWO_PI, _SAMPLES, endpoint=False)
        f = self(y)
        if not np.all(np.isfinite(f)) or f.max() >= 0.0 or f.min() <= -1.0:
            raise InvalidGeometry(
                f"profile leaves ]-1, 0[: range [{f.min():.4g}, {f.max():.4g}]")
        object.__setattr__(self, "lipschitz", float(np.max(np.abs(self.derivative(y)))))

    def __call__(self, y1):
        y1 = np.asarray(y1, dtype=np.float64)
        out = np.full(y1.shape, float(self.mean))
        for j, a in enumerate(self.cos_coeffs, start=1):
            out = out + a * np.cos(j * y1)
        for j, b in enumerate(self.sin_coeffs, start=1):
            out = out + b * np.sin(j * y1)
        return out if out.ndim else float(out)

    def derivative(self, y1):
        y1 = np.asarray(y1, dtype=np.float64)
        out = np.zeros(y1.shape)
        for j, a in enumerate(self.cos_coeffs, start=1):
            out = out - j * a * np.sin(j * y1)
        for j, b in enumerate(self.sin_coeffs, start=1):
            out = out + j * b * np.cos(j * y1)
        return out

    @property
    def is_flat(self):
        return not any(self.cos_coeffs) and not any(self.sin_coeffs)

    @property
    def is_even(self):
        return not any(self.sin_coeffs)

    def mirrored(self):
        """Profile of ``y1 -> f(-y1)``."""
        return RoughProfile(self.mean, self.cos_coeffs,
                            tuple(-b for b in self.sin_coeffs))

    def depth(self):
        y = np.linspace(0.0, TWO_PI, _SAMPLES, endpoint=False)
        return float(-self(y).min())

    @classmethod
    def flat(cls, depth):
        return cls(-float(depth))

    @classmethod
    def default(cls):
        """Asymmetric test profile: odd part keeps the vertical corrector nonzero."""
        return cls(-0.5, (0.2,), (0.0, 0.1))


def eval_profile(p, y1):
    return p(y1)


@dataclass(frozen=True)
class DomainSpec:
    L: float
    epsilon: float
    C: float
    profile: RoughProfile

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidGeometry("epsilon must be positive")
        if not math.isfinite(self.C):
            raise InvalidGeometry("C must be finite")
        if not self.L > 0:
            raise InvalidGeometry("L must be positive")
        ratio = self.L / (TWO_PI * self.epsilon)
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise InvalidGeometry(
                f"L/(2π ε) = {ratio:.12g} is not a positive integer")

    @property
    def n_periods(self):
        return int(round(self.L / (TWO_PI * self.epsilon)))

    def with_epsilon(self, epsilon):
        return DomainSpec(self.L, epsilon, self.C, self.profile)


# -- vertical node distributions ------------------------------------------

def uniform_heights(top, n):
    return np.linspace(0.0, top, n + 1)


def graded_heights(top, n2, ratio=GRADING_RATIO, ref_n2=GRADING_REF_N2):
    """Rows on ``[0, top]``: spacing ``1/n2`` up to 1, then exponential growth.

    The map ``u -> height`` is fixed and sampled at ``u = k / n2``, so doubling
    ``n2`` keeps every coarse row. The growth per layer equals ``ratio`` at
    ``n2 == ref_n2``.
    """
    if top <= 1.0:
        return uniform_heights(top, max(1, int(math.ceil(top * n2))))
    kappa = ref_n2 * math.log(ratio)
    lower = np.arange(n2 + 1) / n2
    u_top = math.log1p(kappa * (top - 1.0)) / kappa
    k = np.arange(1, int(math.floor(u_top * n2)) + 1)
    upper = 1.0 + np.expm1(kappa * k / n2) / kappa
    upper = upper[upper < top * (1 - 1e-12)]
    h = np.concatenate([lower, upper, [top]])
    if len(h) > n2 + 2 and (h[-1] - h[-2]) < 0.3 * (h[-2] - h[-3]):
        h = np.delete(h, -2)
    return h


def default_sublayers(profile, ppp):
    """Layers in the rough sublayer so that its spacing is about the column spacing."""
    return max(2, int(math.ceil(profile.depth() * ppp / TWO_PI)))


# -- structured mesh -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StructuredGrid:
    """Index layout behind a `Mesh`; used for O(1) point location."""

    x0: float
    hx: float
    nx: int
    bottom: np.ndarray      # (nx + 1,) lower-boundary height per node column
    s_levels: np.ndarray    # (nb + 1,) lower-block parameters, 0 at bottom, 1 at interface
    heights: np.ndarray     # (nt + 1,) upper-block row heights, heights[0] == 0
    slash: np.ndarray       # (nx,) True where the quad diagonal runs SW-NE

    @property
    def nb(self):
        return len(self.s_levels) - 1

    @property
    def nt(self):
        return len(self.heights) - 1

    @property
    def nrows(self):
        return self.nb + self.nt + 1

    def vid(self, col, row):
        return row * (self.nx + 1) + col


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray            # (N, 2)
    triangles: np.ndarray           # (M, 3), counterclockwise
    edges: dict                     # tag -> (k, 2) vertex pairs
    periodic_pairs: np.ndarray      # (P, 2) master, slave
    block: np.ndarray               # (M,) 0 lower block, 1 upper block
    grid: StructuredGrid
    period: float = 0.0             # x-period of the pairing, 0 when none

    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    @property
    def h(self):
        """Largest edge length."""
        p = self.vertices[self.triangles]
        d = np.linalg.norm(p - np.roll(p, 1, axis=1), axis=2)
        return float(d.max())

    def boundary_tags(self):
        return [t for t in self.edges if t != "Interface"]

    def tagged_vertices(self, tag):
        return np.unique(self.edges[tag])

    def region_mask(self, region):
        if region in ("full", None):
            return np.ones(len(self.triangles), dtype=bool)
        if region in ("Omega0", "upper"):
            return self.block == 1
        if region in ("sublayer", "lower"):
            return self.block == 0
        raise ValueError(f"unknown region {region!r}")

    def dof_map(self, periodic):
        """Vertex -> representative vertex, merging periodic slaves into masters."""
        m = np.arange(self.n_vertices)
        if periodic and len(self.periodic_pairs):
            m[self.periodic_pairs[:, 1]] = self.periodic_pairs[:, 0]
        return m

    # -- point location ---------------------------------------------------

    def locate(self, points, snap=1e-12, clamp=False):
        """Containing triangle and barycentric weights for each point.

        Returns ``(tri, bary, inside)``. Points farther than ``snap`` outside
        get ``inside == False``; with ``clamp=True`` they are projected onto
        the nearest element of their column instead.
        """
        g = self.grid
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        tol = snap * max(1.0, g.hx * g.nx)
        inside = (x >= g.x0 - tol) & (x <= g.x0 + g.nx * g.hx + tol)
        tcol = (x - g.x0) / g.hx
        col = np.clip(np.floor(tcol).astype(np.int64), 0, g.nx - 1)
        t = np.clip(tcol - col, 0.0, 1.0)
        bchord = g.bottom[col] * (1.0 - t) + g.bottom[col + 1] * t
        top = g.heights[-1]
        inside &= (y >= bchord - tol) & (y <= top + tol)

        row = np.empty(len(pts), dtype=np.int64)
        low = y < 0.0
        if g.nb > 0:
            s = np.clip(1.0 - y[low] / bchord[low], 0.0, 1.0)
            row[low] = np.clip(np.searchsorted(g.s_levels, s, side="right") - 1, 0, g.nb - 1)
        else:
            row[low] = g.nb
        yu = np.clip(y[~low], 0.0, top)
        row[~low] = g.nb + np.clip(np.searchsorted(g.heights, yu, side="right") - 1,
                                   0, g.nt - 1)

        quad = row * g.nx + col
        # candidate triangles per quad: index 2*quad and 2*quad + 1
        tri_a = 2 * quad
        tri_b = tri_a + 1
        bary_a = self._bary(tri_a, pts)
        bary_b = self._bary(tri_b, pts)
        use_b = bary_b.min(axis=1) > bary_a.min(axis=1)
        tri = np.where(use_b, tri_b, tri_a)
        bary = np.where(use_b[:, None], bary_b, bary_a)
        worst = bary.min(axis=1)
        inside &= worst >= -max(snap, 1e-9)
        if clamp:
            bary = np.clip(bary, 0.0, None)
            bary /= bary.sum(axis=1, keepdims=True)
        return tri, bary, inside

    def _bary(self, tri, pts):
        p = self.vertices[self.triangles[tri]]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        r = pts - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d2[:, 0] * d1[:, 1]
        l1 = (r[:, 0] * d2[:, 1] - d2[:, 0] * r[:, 1]) / det
        l2 = (d1[:, 0] * r[:, 1] - r[:, 0] * d1[:, 1]) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=1)


def _split_pattern(nx, ppp, split):
    if split == "uniform":
        return np.ones(nx, dtype=bool)
    if split == "mirror":
        if ppp % 2:
            raise InvalidGeometry("mirror split needs an even ppp")
        return (np.arange(nx) % ppp) < ppp // 2
    raise ValueError(f"unknown split {split!r}")


def _assemble_grid(grid, bottom_tag, top_tag, left_tag, right_tag, periodic):
    nx, n1 = grid.nx, grid.nx + 1
    xs = grid.x0 + grid.hx * np.arange(n1)
    rows = []
    for s in grid.s_levels[:-1]:
        rows.append(grid.bottom * (1.0 - s))
    for hgt in grid.heights:
        rows.append(np.full(n1, hgt))
    ys = np.vstack(rows)
    if grid.nb > 0 and np.any(grid.bottom >= 0.0):
        raise InvalidGeometry("degenerate mapping: bottom at or above the interface")
    if np.any(np.diff(ys, axis=0) <= 0.0):
        raise InvalidGeometry("degenerate mapping: rows not strictly increasing")
    vertices = np.column_stack([np.tile(xs, grid.nrows), ys.ravel()])

    nr = grid.nrows - 1
    r, c = np.meshgrid(np.arange(nr), np.arange(nx), indexing="ij")
    v00 = (r * n1 + c).ravel()
    v10, v01 = v00 + 1, v00 + n1
    v11 = v01 + 1
    slash = np.tile(grid.slash, nr)
    ta = np.where(slash[:, None], np.column_stack([v00, v10, v11]),
                  np.column_stack([v00, v10, v01]))
    tb = np.where(slash[:, None], np.column_stack([v00, v11, v01]),
                  np.column_stack([v10, v11, v01]))
    triangles = np.empty((2 * len(v00), 3), dtype=np.int64)
    triangles[0::2] = ta
    triangles[1::2] = tb
    block = np.repeat((r.ravel() >= grid.nb).astype(np.int8), 2)

    def hchain(row):
        v = row * n1 + np.arange(n1)
        return np.column_stack([v[:-1], v[1:]])

    def vchain(col):
        v = np.arange(grid.nrows) * n1 + col
        return np.column_stack([v[:-1], v[1:]])

    edges = {}
    for tag, e in ((bottom_tag, hchain(0)), ("Interface", hchain(grid.nb)),
                   (top_tag, hchain(grid.nrows - 1)), (left_tag, vchain(0)),
                   (right_tag, vchain(nx))):
        edges[tag] = np.vstack([edges[tag], e]) if tag in edges else e
    pairs = np.zeros((0, 2), dtype=np.int64)
    if periodic:
        rr = np.arange(grid.nrows)
        pairs = np.column_stack([rr * n1, rr * n1 + nx])
    mesh = Mesh(vertices, triangles, edges, pairs, block, grid,
                period=grid.nx * grid.hx if periodic else 0.0)
    if np.any(mesh.areas <= 0.0):
        raise InvalidGeometry("mesh has non-positive triangle areas")
    return mesh


def _check_res(ppp, n2):
    if ppp < 8 or n2 < 8:
        raise InvalidGeometry("need ppp >= 8 and n2 >= 8")


def build_rough_mesh(spec, ppp, n2, n_sub=None, heights=None, split="uniform"):
    """Mesh of ``{0 < x1 < L, ε f(x1/ε) < x2 < 1}``.

    ``n2`` uniform layers span ``[0, 1]`` unless explicit ``heights`` are
    given; the sublayer gets ``n_sub`` mapped layers.
    """
    _check_res(ppp, n2)
    eps = spec.epsilon
    nx = ppp * spec.n_periods
    hx = spec.L / nx
    xs = hx * np.arange(nx + 1)
    bottom = eps * spec.profile(xs / eps)
    bottom[-1] = bottom[0]
    n_sub = default_sublayers(spec.profile, ppp) if n_sub is None else n_sub
    h = uniform_heights(1.0, n2) if heights is None else np.asarray(heights, float)
    grid = StructuredGrid(0.0, hx, nx, bottom, np.linspace(0.0, 1.0, n_sub + 1), h,
                          _split_pattern(nx, ppp, split))
    return _assemble_grid(grid, "GammaEps", "Gamma1", "GammaIn", "GammaOut", True)


def build_cell_mesh(p, Y, ppp, n2, n_sub=None, split="mirror"):
    """Mesh of the truncated cell ``{0 < y1 < 2π, f(y1) < y2 < Y}``."""
    _check_res(ppp, n2)
    if Y < 5:
        raise InvalidGeometry("cell truncation height must be >= 5")
    hx = TWO_PI / ppp
    xs = hx * np.arange(ppp + 1)
    bottom = p(xs)
    bottom[-1] = bottom[0]
    n_sub = default_sublayers(p, ppp) if n_sub is None else n_sub
    grid = StructuredGrid(0.0, hx, ppp, bottom, np.linspace(0.0, 1.0, n_sub + 1),
                          graded_heights(Y, n2), _split_pattern(ppp, ppp, split))
    return _assemble_grid(grid, "CellBottom", "CellTop", "CellSide", "CellSide", True)


def build_quarter_mesh(p, n_periods, Y, ppp, n2, n_sub=None, split="mirror"):
    """Mesh of the truncated rough quarter-plane ``{0 < y1 < 2π N, f < y2 < Y}``."""
    _check_res(ppp, n2)
    if n_periods < 5 or Y < 10:
        raise InvalidGeometry("quarter plane needs n_periods >= 5 and Y >= 10")
    nx = ppp * n_periods
    hx = TWO_PI / ppp
    xs = hx * np.arange(nx + 1)
    bottom = p(xs)
    n_sub = default_sublayers(p, ppp) if n_sub is None else n_sub
    grid = StructuredGrid(0.0, hx, nx, bottom, np.linspace(0.0, 1.0, n_sub + 1),
                          graded_heights(Y, n2), _split_pattern(nx, ppp, split))
    return _assemble_grid(grid, "QuarterB", "QuarterFar", "QuarterE", "QuarterFar", False)


def check_mesh(mesh):
    """Validate mesh invariants; raises `InvalidGeometry` on the first failure."""
    if np.any(mesh.areas <= 0.0):
        raise InvalidGeometry("non-positive triangle area")
    bedges = np.vstack([mesh.edges[t] for t in mesh.boundary_tags()])
    # boundary edges are exactly the edges used by one triangle
    t = mesh.triangles
    all_e = np.sort(np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    u, cnt = np.unique(all_e, axis=0, return_counts=True)
    single = u[cnt == 1]
    got = np.unique(np.sort(bedges, axis=1), axis=0)
    if len(got) != len(bedges) or not np.array_equal(got, single):
        raise InvalidGeometry("tagged edges do not partition the boundary")
    deg = np.bincount(bedges.ravel(), minlength=mesh.n_vertices)
    if np.any(deg[deg > 0] != 2):
        raise InvalidGeometry("boundary is not a closed loop")
    if len(mesh.periodic_pairs):
        slaves = mesh.periodic_pairs[:, 1]
        if len(np.unique(slaves)) != len(slaves):
            raise InvalidGeometry("periodic slave listed twice")
        d = mesh.vertices[slaves] - mesh.vertices[mesh.periodic_pairs[:, 0]]
        if not np.allclose(d, [mesh.period, 0.0], atol=1e-12 * max(1.0, mesh.period)):
            raise InvalidGeometry("periodic pair is not a period translate")
    return True


def build_rectangle_mesh(width, height, nx, ny, split="uniform", periodic=False):
    """Uniform mesh of ``[0, width] x [0, height]`` (single block, no sublayer).

    Tags: ``Bottom``, ``Top``, ``Left``, ``Right``.
    """
    grid = StructuredGrid(0.0, width / nx, nx, np.zeros(nx + 1), np.zeros(1),
                          uniform_heights(height, ny), _split_pattern(nx, nx, split))
    return _assemble_grid(grid, "Bottom", "Top", "Left", "Right", periodic)
