import math

import numpy as np
import pytest

from roughwall.cell import neumann_trace_g, solve_cell
from roughwall.corrector import (ALPHA0, NO_DECAY_DATA, DecayParameters, decay_report, eval_xi,
                                 solve_xi, solve_xi_pair, xi_gradient)
from roughwall.errors import InsufficientDomain
from roughwall.geometry import RoughProfile


def test_decay_parameter_validation():
    p = DecayParameters()
    assert p.radial_bound == pytest.approx(-(1 - 1 / 9.8))
    assert p.line_bound == pytest.approx(-1.8)
    assert ALPHA0 == pytest.approx(0.45016, abs=1e-5)
    with pytest.raises(ValueError):
        DecayParameters(alpha=0.46)
    with pytest.raises(ValueError):
        DecayParameters(alpha=0.4, M=5.5)


def test_flat_xi_vanishes():
    cell = solve_cell(RoughProfile.flat(0.5), Y=10.0, ppp=32, n2=8)
    xi = solve_xi(cell, n_periods=5, Y=10.0, ppp=16, n2=8)
    assert xi.h1_norm() <= 1e-10
    assert decay_report(xi) is NO_DECAY_DATA


def test_even_xi_vanishes(even_cell):
    xi = solve_xi(even_cell, n_periods=10, Y=20.0, ppp=32, n2=8)
    assert xi.h1_norm() <= 1e-6


def test_xi_against_refinement_fixture(default_cell, default_xi, refinement):
    # first-order convergence from the corner singularity, hence the loose band
    assert default_xi.h1_seminorm() == pytest.approx(refinement["xi_h1_semi"]["limit"], rel=0.05)


def test_xi_boundary_values(default_xi):
    mesh = default_xi.mesh
    b = mesh.tagged_vertices("QuarterB")
    assert np.all(default_xi.xi.values[b] == 0.0)
    assert eval_xi(default_xi, mesh.vertices[b[5:6]])[0] == 0.0
    assert eval_xi(default_xi, [[default_xi.width + 1.0, 1.0]])[0] == 0.0
    k = mesh.n_vertices // 2
    assert eval_xi(default_xi, mesh.vertices[k:k + 1])[0] == pytest.approx(
        default_xi.xi.values[k], abs=1e-14)


def test_xi_matches_neumann_data(default_cell, default_xi):
    # ∂ξ/∂y1 next to the edge follows g
    y2 = np.linspace(0.5, 3.0, 6)
    g = xi_gradient(default_xi, np.column_stack([np.full_like(y2, 1e-3), y2]))[:, 0]
    assert np.allclose(g, neumann_trace_g(default_cell, y2), atol=0.05 * np.abs(g).max())


def test_decay_exponents(default_xi):
    rep = decay_report(default_xi)
    assert rep.radial_exponent <= -0.5
    assert rep.line_exponent <= -1.0
    assert len(rep.shells) >= 3 and len(rep.lines) >= 2


def test_decay_needs_room(default_cell):
    xi = solve_xi(default_cell, n_periods=5, Y=10.0, ppp=16, n2=8)
    with pytest.raises(InsufficientDomain):
        decay_report(xi, shells=(16.0, 32.0, 64.0))


def test_outlet_corrector_is_mirror_problem(default_cell):
    xin, xout = solve_xi_pair(default_cell, n_periods=5, Y=10.0, ppp=16, n2=8)
    assert xout.mirror and not xin.mirror
    assert xout.mesh.vertices[0, 1] == pytest.approx(default_cell.profile.mirrored()(0.0))
    # reversing y1 twice gives back the inlet data
    twice = solve_xi(default_cell.mirrored().mirrored(), n_periods=5, Y=10.0, ppp=16, n2=8)
    assert np.allclose(twice.xi.values, xin.xi.values, atol=1e-12)
