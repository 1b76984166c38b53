import numpy as np
import pytest

from roughwall.corrector import eval_xi, solve_xi_pair
from roughwall.errors import DegenerateDenominator, MissingCorrector, OutOfDomain
from roughwall.geometry import TWO_PI, DomainSpec, RoughProfile
from roughwall.walllaw import (ApproxField, WallLawParams, full_bl, full_bl_grad, u0, u1,
                               u1_extended, u2)

P = WallLawParams(epsilon=0.1, C=1.0, L=TWO_PI, beta_bar=0.5, tau_bar=-0.25)


def pts(x2, x1=0.3):
    x2 = np.atleast_1d(np.asarray(x2, float))
    return np.column_stack([np.full_like(x2, x1), x2])


def test_u0():
    assert np.allclose(u0(P, pts([0.0, 1.0])), 0.0)
    assert u0(P, pts(0.5))[0] == pytest.approx(0.125)
    h, x = 1e-4, np.linspace(0.1, 0.9, 5)
    d2 = (u0(P, pts(x + h)) - 2 * u0(P, pts(x)) + u0(P, pts(x - h))) / h ** 2
    assert np.allclose(-d2, P.C, atol=1e-5)


def test_u1():
    zero = WallLawParams(0.0, 1.0, TWO_PI, 0.5)
    x = pts(np.linspace(0, 1, 11))
    assert np.allclose(u1(zero, x), u0(zero, x), atol=1e-15)
    assert u1(P, pts(0.0))[0] == pytest.approx(0.05 / 2.1, abs=1e-12)
    assert u1(P, pts(1.0))[0] == pytest.approx(0.0, abs=1e-15)
    # Saffman-Joseph condition u = ε β̄ ∂u/∂x2 at x2 = 0
    assert u1(P, pts(0.0))[0] == pytest.approx(P.epsilon * P.beta_bar * P.du1_wall())


def test_u2():
    zero = WallLawParams(0.0, 1.0, TWO_PI, 0.5, -0.25)
    x = pts(np.linspace(0, 1, 11))
    assert np.allclose(u2(zero, x), u0(zero, x), atol=1e-15)
    assert u2(P, pts(0.0))[0] == pytest.approx(0.025, abs=1e-12)


@pytest.mark.parametrize("c,eps", [(0.5, 0.1), (0.3, 0.2)])
def test_u2_flat_identity(c, eps):
    pr = WallLawParams(eps, 1.7, TWO_PI, c, -c * c)
    x2 = np.linspace(-eps * c, 1, 21)
    exact = -0.5 * 1.7 * (x2 - 1) * (x2 + eps * c)
    assert np.allclose(u2(pr, pts(x2)), exact, atol=1e-14)


def test_degenerate_denominator():
    with pytest.raises(DegenerateDenominator):
        WallLawParams(0.1, 1.0, TWO_PI, -10.0).denom


def test_u1_extended(default_profile):
    assert u1_extended(P, pts(1.0))[0] == pytest.approx(0.0, abs=1e-15)
    x = pts(np.linspace(0, 1, 11))
    assert np.allclose(u1_extended(P, x), u1(P, x), atol=1e-15)
    # continuous with matching slope across the interface
    h = 1e-7
    assert u1_extended(P, pts(-h))[0] == pytest.approx(u1_extended(P, pts(h))[0], abs=1e-7)
    with pytest.raises(OutOfDomain):
        u1_extended(P, [[0.0, -0.09]], profile=default_profile)


def test_first_order_composite_vanishes_on_rough_wall(default_cell):
    spec = DomainSpec(TWO_PI, 0.1, 1.0, default_cell.profile)
    pr = WallLawParams.from_cell(spec, default_cell)
    approx = ApproxField(pr, "first", "full_periodic", default_cell)
    x1 = np.linspace(0, TWO_PI, 257)
    # sample at the cell-mesh bottom nodes, where β = -y2 holds exactly
    x1 = x1[np.isclose(np.mod(x1 / 0.1, TWO_PI / 64), 0) | np.isclose(
        np.mod(x1 / 0.1, TWO_PI / 64), TWO_PI / 64)]
    wall = np.column_stack([x1, 0.1 * default_cell.profile(x1 / 0.1)])
    assert np.max(np.abs(full_bl(approx, wall))) <= 1e-8


def test_flat_composite_is_u1():
    from roughwall.cell import solve_cell
    cell = solve_cell(RoughProfile.flat(0.5), Y=10.0, ppp=32, n2=8)
    pr = WallLawParams(0.1, 1.0, TWO_PI, cell.beta_bar, cell.tau_bar)
    xin, xout = solve_xi_pair(cell, n_periods=5, Y=10.0, ppp=16, n2=8)
    x = np.column_stack([np.linspace(0, TWO_PI, 40), np.linspace(0, 1, 40)])
    for approx in (ApproxField(pr, "first", "full_periodic", cell),
                   ApproxField(pr, "first", "full_neumann", cell, xin, xout)):
        assert np.allclose(approx(x), u1(pr, x), atol=1e-10)


def test_periodic_correction_negligible_at_top(default_cell):
    x1 = np.linspace(0, TWO_PI, 101)
    eta = default_cell.eta
    tail = np.sum(np.abs(eta.coeffs[eta.k != 0]))
    for eps in (0.2, 0.1, 0.05, 0.025):
        spec = DomainSpec(TWO_PI, eps, 1.0, default_cell.profile)
        pr = WallLawParams.from_cell(spec, default_cell)
        approx = ApproxField(pr, "first", "full_periodic", default_cell)
        top = np.column_stack([x1, np.ones_like(x1)])
        gap = np.max(np.abs(approx(top) - u1(pr, top)))
        assert gap <= eps * pr.du1_wall() * tail * np.exp(-1 / eps) * (1 + 1e-9) + 1e-15
        if eps <= 0.05:
            assert gap <= 1e-8


def test_neumann_xi_term_unfolds(default_cell):
    eps = 0.1
    spec = DomainSpec(TWO_PI, eps, 1.0, default_cell.profile)
    pr = WallLawParams.from_cell(spec, default_cell)
    xin, xout = solve_xi_pair(default_cell, n_periods=10, Y=20.0, ppp=16, n2=8)
    per = ApproxField(pr, "first", "full_periodic", default_cell)
    neu = ApproxField(pr, "first", "full_neumann", default_cell, xin, xout)
    x = np.array([[0.0, 0.5]])
    term = per(x) - neu(x)
    assert term[0] == pytest.approx(eps * pr.du1_wall() * eval_xi(xin, x / eps)[0], abs=1e-14)


def test_composite_gradient_matches_differences(default_cell):
    spec = DomainSpec(TWO_PI, 0.1, 1.0, default_cell.profile)
    approx = ApproxField(WallLawParams.from_cell(spec, default_cell), "first",
                         "full_periodic", default_cell)
    x, d = np.array([[1.234, 0.31], [4.0, 0.07]]), 1e-6
    fd = np.column_stack([(approx(x + [d, 0]) - approx(x - [d, 0])) / (2 * d),
                          (approx(x + [0, d]) - approx(x - [0, d])) / (2 * d)])
    assert np.allclose(full_bl_grad(approx, x), fd, atol=1e-6)


def test_approx_validation(default_cell):
    with pytest.raises(MissingCorrector):
        ApproxField(P, "first", "full_periodic")
    with pytest.raises(MissingCorrector):
        ApproxField(P, "first", "full_neumann", default_cell)
    with pytest.raises(ValueError):
        ApproxField(P, "third")
    with pytest.raises(ValueError):
        ApproxField(P, "zeroth", "full_periodic", default_cell)
