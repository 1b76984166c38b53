import json
import math
import os

import numpy as np
import pytest

from roughwall.errors import ConfigError, DegenerateFit
from roughwall.geometry import TWO_PI, DomainSpec, RoughProfile
from roughwall.harness import (CSV_COLUMNS, Config, ConvergenceReport, Resolution,
                               atomic_write, config_from_dict, error_table, fit_rate,
                               flat_resolution, flat_u1_error, run_flat_suite, solve_exact)

FLAT = RoughProfile.flat(0.5)


# -- configuration -------------------------------------------------------------

def test_config_defaults_roundtrip():
    cfg = Config()
    again = config_from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    assert cfg.decay.alpha == 0.4 and cfg.decay.M == 4.9


def test_config_parses_nested():
    cfg = config_from_dict({"profile": {"mean": -0.4, "cos": [0.1]}, "C": 2,
                            "epsilons": [0.2, 0.1], "mesh": {"ppp": 16},
                            "solver": {"tol": 1e-9}, "decay": {"alpha": 0.42}})
    assert cfg.profile.mean == -0.4 and cfg.C == 2.0 and cfg.mesh.ppp == 16
    assert cfg.mesh.cell_Y == 10.0 and cfg.solver.tol == 1e-9 and cfg.decay.M == 4.9


@pytest.mark.parametrize("bad", [
    {"colour": 1},
    {"mesh": {"ppp": 16, "nx": 3}},
    {"profile": {"mean": -0.5, "tan": [1]}},
    {"solver": {"tolerance": 1e-3}},
    {"decay": {"alpha": 0.7}},
    {"epsilons": [0.3]},
    {"profile": {"mean": 0.2}},
    {"mesh": 16},
    [],
])
def test_config_rejects(bad):
    with pytest.raises((ConfigError, ValueError)):
        config_from_dict(bad)


# -- exact solves ----------------------------------------------------------------

@pytest.mark.parametrize("mode", ["periodic", "neumann"])
@pytest.mark.parametrize("eps", [0.2, 0.1])
def test_flat_exact_solution_nodal(mode, eps):
    spec = DomainSpec(TWO_PI, eps, 1.0, FLAT)
    u, _ = solve_exact(spec, mode, flat_resolution(eps, 0.5, min_n2=40), tol=1e-13)
    x2 = u.mesh.vertices[:, 1]
    assert np.max(np.abs(u.values + 0.5 * (x2 - 1) * (x2 + eps * 0.5))) <= 1e-8


def test_zero_source_and_linearity():
    spec = DomainSpec(TWO_PI, 0.2, 1.0, RoughProfile.default())
    res = Resolution(16)
    zero, _ = solve_exact(DomainSpec(TWO_PI, 0.2, 0.0, RoughProfile.default()), "periodic", res)
    assert np.all(zero.values == 0.0)
    one, _ = solve_exact(spec, "neumann", res, tol=1e-13)
    two, _ = solve_exact(DomainSpec(TWO_PI, 0.2, 2.0, RoughProfile.default()), "neumann", res,
                         tol=1e-13)
    assert np.allclose(two.values, 2 * one.values, rtol=0, atol=1e-11)


def test_bad_bc_mode():
    with pytest.raises(ValueError):
        solve_exact(DomainSpec(TWO_PI, 0.2, 1.0, FLAT), "dirichlet")


# -- rate fitting -----------------------------------------------------------------

def test_fit_rate_exact_power_laws():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    r = fit_rate(eps, eps ** 1.5)
    assert r["slope"] == pytest.approx(1.5, abs=1e-10) and r["r2"] == pytest.approx(1.0)
    r = fit_rate(eps, 3 * eps ** 2)
    assert r["slope"] == pytest.approx(2.0, abs=1e-10)
    assert r["intercept"] == pytest.approx(math.log(3), abs=1e-10)


def test_fit_rate_degenerate():
    with pytest.raises(DegenerateFit):
        fit_rate([0.2, 0.1, 0.05], [1e-3, 1e-15, 1e-4])
    with pytest.raises(DegenerateFit):
        fit_rate([0.2, 0.1], [1e-3, 1e-4])


# -- reports ------------------------------------------------------------------------

def test_csv_format():
    rep = ConvergenceReport("neumann", rows=[
        {"eps": 0.1, "h": 0.1 / 3, "dofs": 12, "err_u0": 1e-3, "err_u1": 2.5e-4,
         "err_u2": 1e-4, "err_bl1": 5e-5, "err_bl2": None, "err_h1_bl1": 0.1}])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "eps,h,dofs,err_u0,err_u1,err_u2,err_bl1,err_bl2,err_h1_bl1"
    assert lines[0] == ",".join(CSV_COLUMNS)
    fields = lines[1].split(",")
    assert fields[7] == "" and fields[2] == "12"
    assert float(fields[1]) == 0.1 / 3 and fields[1] == repr(0.1 / 3)


@pytest.fixture(scope="module")
def flat_report():
    cfg = Config(profile=FLAT, epsilons=[0.05, 0.2, 0.1])
    # flat wall: the solution is x1-independent, so spend the nodes vertically
    return error_table(cfg, "periodic", Resolution(16, aspect=0.125), threads=2)


def test_flat_report_rows_and_columns(flat_report):
    eps = flat_report.column("eps")
    assert np.all(np.diff(eps) < 0)
    for name in CSV_COLUMNS[3:]:
        assert np.all(flat_report.column(name) >= 0)
    for r in flat_report.rows:
        ref = flat_u1_error(1.0, 0.5, r["eps"], TWO_PI)
        assert r["err_u1"] == pytest.approx(ref, rel=0.05)
        # u2 is the exact flat solution: only the discretisation floor remains
        assert r["err_u2"] <= 0.05 * r["err_u1"]


def test_flat_report_slopes(flat_report):
    assert flat_report.slopes["err_u0"]["slope"] == pytest.approx(1.0, abs=0.05)
    eps = [0.2, 0.1, 0.05]
    closed = fit_rate(eps, [flat_u1_error(1.0, 0.5, e, TWO_PI) for e in eps])["slope"]
    assert flat_report.slopes["err_u1"]["slope"] == pytest.approx(closed, abs=0.02)
    assert flat_report.slopes["err_u1"]["slope"] == pytest.approx(2.0, abs=0.1)


def test_report_deterministic_and_thread_independent():
    cfg = Config(epsilons=[0.2, 0.1, 0.05])
    cfg.mesh.ppp = 16
    a = error_table(cfg, "periodic", threads=1).to_csv()
    b = error_table(cfg, "periodic", threads=3).to_csv()
    ra = np.genfromtxt(a.splitlines()[1:], delimiter=",")
    rb = np.genfromtxt(b.splitlines()[1:], delimiter=",")
    assert np.allclose(ra, rb, rtol=1e-12, atol=0)


def test_floor_check_flags_discretisation_limited_columns():
    cfg = Config(profile=FLAT, epsilons=[0.2, 0.1, 0.05])
    cfg.mesh.ppp = 16
    rep = error_table(cfg, "periodic", floor_check=True)
    # u2 is exact for a flat wall, so its column is pure discretisation error
    assert len(rep.flags) == 3
    for cols in rep.flags.values():
        assert "err_u2" in cols and "err_u0" not in cols


# -- flat suite ------------------------------------------------------------------------

def test_flat_suite_default():
    res = run_flat_suite(0.5)
    assert res["passed"], res


def test_flat_suite_quarter_depth():
    res = run_flat_suite(0.25, epsilons=(0.2, 0.1, 0.05))
    beta = next(c for c in res["checks"] if c["name"] == "beta_bar")
    assert beta["value"] <= 1e-9


def test_flat_suite_reports_closed_form_at_runtime():
    res = run_flat_suite(0.5, epsilons=(0.2, 0.1, 0.05))
    chk = next(c for c in res["checks"] if c["name"] == "u1_closed_form[eps=0.2]")
    assert f"{flat_u1_error(1.0, 0.5, 0.2, TWO_PI):.6e}" in chk["detail"]


# -- io --------------------------------------------------------------------------------

def test_atomic_write(tmp_path):
    path = tmp_path / "sub" / "x.json"
    atomic_write(str(path), json.dumps({"a": 1}))
    assert json.loads(path.read_text()) == {"a": 1}
    assert [p.name for p in path.parent.iterdir()] == ["x.json"]
    atomic_write(str(path), "second")
    assert path.read_text() == "second"
