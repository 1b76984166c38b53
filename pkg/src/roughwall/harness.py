"""Exact rough-domain solves, convergence tables and the flat-wall oracle suite."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import logging
import math
import os
import tempfile
import time

import numpy as np

from .cell import solve_cell
from .corrector import DecayParameters, solve_xi, solve_xi_pair
from .errors import ConfigError, DegenerateFit
from .fem import apply_bc, assemble, norm_on_region, solve
from .geometry import TWO_PI, DomainSpec, RoughProfile, build_rough_mesh, default_sublayers
from .linalg import DEFAULT_TOL
from .walllaw import ApproxField, WallLawParams, full_bl_grad

log = logging.getLogger(__name__)

CSV_COLUMNS = ("eps", "h", "dofs", "err_u0", "err_u1", "err_u2", "err_bl1", "err_bl2",
               "err_h1_bl1")
ERROR_COLUMNS = CSV_COLUMNS[3:]
BC_MODES = ("periodic", "neumann")


# -- configuration ---------------------------------------------------------

@dataclass
class MeshConfig:
    ppp: int = 32
    n2: int = 16
    cell_Y: float = 10.0
    corrector_periods: int = 10
    corrector_Y: float = 20.0


@dataclass
class SolverConfig:
    tol: float = DEFAULT_TOL
    max_iter: int = None


@dataclass
class Config:
    profile: RoughProfile = field(default_factory=RoughProfile.default)
    C: float = 1.0
    L: float = TWO_PI
    epsilons: list = field(default_factory=lambda: [1 / 5, 1 / 10, 1 / 20, 1 / 40])
    mesh: MeshConfig = field(default_factory=MeshConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    decay: DecayParameters = field(default_factory=DecayParameters)

    def spec(self, epsilon):
        return DomainSpec(self.L, epsilon, self.C, self.profile)

    @property
    def cell_ppp(self):
        return 2 * self.mesh.ppp

    def to_dict(self):
        p = self.profile
        return {"profile": {"mean": p.mean, "cos": list(p.cos_coeffs), "sin": list(p.sin_coeffs)},
                "C": self.C, "L": self.L, "epsilons": list(self.epsilons),
                "mesh": asdict(self.mesh), "solver": asdict(self.solver),
                "decay": {"alpha": self.decay.alpha, "M": self.decay.M}}


_KEYS = {
    "profile": {"mean", "cos", "sin"},
    "C": None, "L": None, "epsilons": None,
    "mesh": set(MeshConfig.__dataclass_fields__),
    "solver": set(SolverConfig.__dataclass_fields__),
    "decay": {"alpha", "M"},
}


def config_from_dict(d):
    """Validate a config mapping; unknown keys are rejected."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    for k, v in d.items():
        if k not in _KEYS:
            raise ConfigError(f"unknown config key {k!r}")
        sub = _KEYS[k]
        if sub is not None:
            if not isinstance(v, dict):
                raise ConfigError(f"{k!r} must be an object")
            extra = set(v) - sub
            if extra:
                raise ConfigError(f"unknown key(s) {sorted(extra)} in {k!r}")
    cfg = Config()
    try:
        if "profile" in d:
            p = d["profile"]
            cfg.profile = RoughProfile(float(p.get("mean", -0.5)), p.get("cos", ()),
                                       p.get("sin", ()))
        if "C" in d:
            cfg.C = float(d["C"])
        if "L" in d:
            cfg.L = float(d["L"])
        if "epsilons" in d:
            cfg.epsilons = [float(e) for e in d["epsilons"]]
        if "mesh" in d:
            cfg.mesh = MeshConfig(**{**asdict(cfg.mesh), **d["mesh"]})
        if "solver" in d:
            cfg.solver = SolverConfig(**{**asdict(cfg.solver), **d["solver"]})
        if "decay" in d:
            cfg.decay = DecayParameters(**{"alpha": 0.4, "M": 4.9, **d["decay"]})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    for e in cfg.epsilons:
        cfg.spec(e)  # divisibility
    return cfg


def load_config(path):
    if path is None:
        return Config()
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


# -- solves ------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    """Exact-solve mesh: ``ppp`` columns per period, rows spaced like columns."""

    ppp: int = 32
    aspect: float = 1.0
    n2: int = None
    n_sub: int = None

    def mesh_args(self, spec):
        hx = TWO_PI * spec.epsilon / self.ppp
        n2 = self.n2 or max(8, int(round(1.0 / (self.aspect * hx))))
        n_sub = self.n_sub or default_sublayers(spec.profile, self.ppp)
        return self.ppp, n2, n_sub

    def refined(self):
        return Resolution(2 * self.ppp, self.aspect,
                          None if self.n2 is None else 2 * self.n2,
                          None if self.n_sub is None else 2 * self.n_sub)


def solve_exact(spec, bc_mode="periodic", resolution=Resolution(), tol=DEFAULT_TOL,
                max_iter=None):
    """P1 solution of ``-Δu = C`` on the rough channel, ``u = 0`` on the walls.

    ``periodic`` pairs the inlet with the outlet; ``neumann`` leaves both with
    the natural zero-flux condition.
    """
    if bc_mode not in BC_MODES:
        raise ValueError(f"bc_mode must be one of {BC_MODES}")
    ppp, n2, n_sub = resolution.mesh_args(spec)
    mesh = build_rough_mesh(spec, ppp, n2, n_sub)
    sysbc = apply_bc(assemble(mesh, spec.C), dirichlet=[("GammaEps", 0.0), ("Gamma1", 0.0)],
                     periodic=(bc_mode == "periodic"))
    u = solve(sysbc, tol=tol, max_iter=max_iter)
    return u, len(sysbc.free)


@dataclass
class ConvergenceReport:
    bc_mode: str
    rows: list = field(default_factory=list)     # dicts keyed by CSV_COLUMNS
    slopes: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)    # eps -> list of suspect columns
    timings: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([np.nan if r.get(name) is None else r[name] for r in self.rows])

    def row(self, eps):
        for r in self.rows:
            if math.isclose(r["eps"], eps, rel_tol=1e-9):
                return r
        raise KeyError(eps)

    def to_csv(self):
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(",".join("" if r.get(c) is None else repr(r[c]) if isinstance(r[c], float)
                                  else str(r[c]) for c in CSV_COLUMNS))
        return "\n".join(lines) + "\n"


def fit_rate(eps, errors):
    """Least-squares slope of ``log err`` against ``log ε``.

    Returns ``{"slope", "intercept", "r2"}``. Raises `DegenerateFit` when
    fewer than 3 points are given or an error underflows ``1e-14``.
    """
    x = np.log(np.asarray(eps, dtype=float))
    e = np.asarray(errors, dtype=float)
    if len(e) < 3:
        raise DegenerateFit("need at least 3 rows")
    if np.any(~np.isfinite(e)) or np.any(e < 1e-14):
        raise DegenerateFit("error column underflows 1e-14")
    y = np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": float(r2)}


def fit_report(report):
    out = {}
    eps = report.column("eps")
    for name in ERROR_COLUMNS:
        col = report.column(name)
        if np.all(np.isnan(col)):
            continue
        try:
            out[name] = fit_rate(eps, col)
        except DegenerateFit as exc:
            out[name] = {"degenerate": str(exc)}
    report.slopes = out
    return out


def _row_errors(spec, bc_mode, resolution, cell, xi, tol, max_iter):
    u, dofs = solve_exact(spec, bc_mode, resolution, tol, max_iter)
    pr = WallLawParams.from_cell(spec, cell)
    l2 = lambda a: norm_on_region(u, "Omega0", "L2", analytic=a)
    row = {"eps": spec.epsilon, "h": TWO_PI * spec.epsilon / resolution.ppp, "dofs": dofs,
           "err_u0": l2(ApproxField(pr, "zeroth")),
           "err_u1": l2(ApproxField(pr, "first")),
           "err_u2": l2(ApproxField(pr, "second")), "err_bl2": None}
    if bc_mode == "periodic":
        bl1 = ApproxField(pr, "first", "full_periodic", cell)
        row["err_bl2"] = l2(ApproxField(pr, "second", "full_periodic", cell))
    else:
        bl1 = ApproxField(pr, "first", "full_neumann", cell, *xi)
    row["err_bl1"] = l2(bl1)
    row["err_h1_bl1"] = norm_on_region(u, "full", "H1", analytic=bl1,
                                       analytic_grad=lambda q: full_bl_grad(bl1, q))
    return row


def build_microscale(cfg, bc_mode, cell=None):
    """Cell solution and, for the Neumann case, the inlet/outlet corrector pair."""
    m, s = cfg.mesh, cfg.solver
    if cell is None:
        cell = solve_cell(cfg.profile, Y=m.cell_Y, ppp=cfg.cell_ppp, n2=m.n2,
                          tol=min(s.tol, 1e-12), max_iter=s.max_iter)
    xi = (None, None)
    if bc_mode == "neumann":
        xi = solve_xi_pair(cell, n_periods=m.corrector_periods, Y=m.corrector_Y,
                           ppp=m.ppp, n2=max(8, m.n2 // 2), tol=min(s.tol, 1e-11),
                           max_iter=s.max_iter)
    return cell, xi


def error_table(cfg, bc_mode="periodic", resolution=None, threads=1, floor_check=False,
                cell=None):
    """Errors of every approximant in ``L²(Ω⁰)`` (and the composite in ``H¹(Ω^ε)``) per ε."""
    resolution = resolution or Resolution(cfg.mesh.ppp)
    t0 = time.perf_counter()
    cell, xi = build_microscale(cfg, bc_mode, cell)
    report = ConvergenceReport(bc_mode)
    report.timings["microscale"] = time.perf_counter() - t0
    eps_list = sorted(cfg.epsilons, reverse=True)

    def run(eps, res):
        t = time.perf_counter()
        row = _row_errors(cfg.spec(eps), bc_mode, res, cell, xi, cfg.solver.tol,
                          cfg.solver.max_iter)
        log.info("eps=%g dofs=%d done in %.1fs", eps, row["dofs"], time.perf_counter() - t)
        return row

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        report.rows = list(pool.map(lambda e: run(e, resolution), eps_list))
        if floor_check:
            fine = list(pool.map(lambda e: run(e, resolution.refined()), eps_list))
            for coarse, f in zip(report.rows, fine):
                bad = [c for c in ERROR_COLUMNS if coarse.get(c) is not None
                       and abs(f[c] - coarse[c]) > 0.1 * abs(f[c])]
                if bad:
                    report.flags[repr(coarse["eps"])] = bad
    report.timings["total"] = time.perf_counter() - t0
    fit_report(report)
    return report


# -- flat-wall analytic suite -------------------------------------------------

def flat_u1_error(C, c, eps, L):
    """Closed form of ``‖u^ε - u1‖_{L²(Ω⁰)}`` for a flat wall at depth ``ε c``."""
    return C * eps ** 2 * c ** 2 / (2.0 * (1.0 + eps * c)) * math.sqrt(L / 3.0)


def flat_resolution(eps, c, ppp=16, min_n2=256):
    """Rows equally spaced across the interface, so the discrete solution is x1-independent."""
    depth = eps * c
    for n2 in range(min_n2, min_n2 + 4000):
        k = n2 * depth
        if abs(k - round(k)) < 1e-9 and round(k) >= 1:
            return Resolution(ppp, n2=n2, n_sub=int(round(k)))
    return Resolution(ppp, n2=min_n2, n_sub=max(2, int(math.ceil(min_n2 * depth))))


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def run_flat_suite(c=0.5, epsilons=(0.2, 0.1, 0.05), eps_check=0.1, C=1.0, L=TWO_PI,
                   bc_mode="periodic", tol=1e-12):
    """Analytic checks for a flat wall at depth ``c``: every law is known in closed form."""
    profile = RoughProfile.flat(c)
    checks = []

    def add(name, value, tolerance, detail=""):
        checks.append(Check(name, float(value), tolerance, bool(value <= tolerance), detail))

    cell = solve_cell(profile, Y=10.0, ppp=32, n2=16, tol=tol)
    add("beta_bar", abs(cell.beta_bar - c), 1e-8, f"beta_bar={cell.beta_bar!r}")
    add("tau_bar", abs(cell.tau_bar + c * c), 1e-8, f"tau_bar={cell.tau_bar!r}")
    xi = solve_xi(cell, n_periods=5, Y=10.0, ppp=16, n2=8, tol=tol)
    add("xi_h1", xi.h1_norm(), 1e-6)

    errs = []
    for eps in epsilons:
        spec = DomainSpec(L, eps, C, profile)
        u, _ = solve_exact(spec, bc_mode, flat_resolution(eps, c), tol=tol)
        pr = WallLawParams(eps, C, L, cell.beta_bar, cell.tau_bar)
        e1 = norm_on_region(u, "Omega0", "L2", analytic=ApproxField(pr, "first"))
        errs.append(e1)
        ref = flat_u1_error(C, c, eps, L)
        add(f"u1_closed_form[eps={eps:g}]", abs(e1 - ref) / ref, 0.05,
            f"measured={e1:.6e} closed_form={ref:.6e}")
        if math.isclose(eps, eps_check):
            e2 = norm_on_region(u, "Omega0", "L2", analytic=ApproxField(pr, "second"))
            add(f"u2_exact[eps={eps:g}]", e2, 5e-6)
    if len(epsilons) >= 3:
        slope = fit_rate(epsilons, errs)["slope"]
        add("u1_slope", abs(slope - 2.0), 0.1, f"slope={slope:.4f}")
    return {"c": c, "bc": bc_mode, "passed": all(ch.passed for ch in checks),
            "checks": [asdict(ch) for ch in checks]}


# -- output ------------------------------------------------------------------

def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
