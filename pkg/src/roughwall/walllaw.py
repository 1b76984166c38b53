"""Averaged wall laws and composite boundary-layer approximations.

Every function takes points as an array ``(..., 2)`` of macroscopic
coordinates ``(x1, x2)`` and returns values of shape ``(...)``.
"""
from dataclasses import dataclass

import numpy as np

from .corrector import eval_xi, xi_gradient
from .errors import DegenerateDenominator, MissingCorrector, OutOfDomain

ORDERS = ("zeroth", "first", "second")
MODES = ("averaged", "full_periodic", "full_neumann")


@dataclass(frozen=True)
class WallLawParams:
    epsilon: float
    C: float
    L: float
    beta_bar: float
    tau_bar: float = 0.0

    @property
    def denom(self):
        d = 1.0 + self.epsilon * self.beta_bar
        if d <= 1e-12:
            raise DegenerateDenominator(f"1 + ε β̄ = {d:.3g}")
        return d

    @classmethod
    def from_cell(cls, spec, cell):
        return cls(spec.epsilon, spec.C, spec.L, cell.beta_bar, cell.tau_bar)

    # closed-form wall derivatives (all x1-independent)
    def du1_wall(self):
        return 0.5 * self.C / self.denom

    def du2_wall(self):
        return 0.5 * self.C * (1.0 + self.epsilon ** 2 * self.tau_bar) / self.denom

    def d2u2(self):
        return -self.C


def _x2(x):
    return np.asarray(x, dtype=np.float64)[..., 1]


def u0(params, x):
    x2 = _x2(x)
    return 0.5 * params.C * x2 * (1.0 - x2)


def u1(params, x):
    """Saffman-Joseph wall law ``u = ε β̄ ∂u/∂x2`` on ``x2 = 0``."""
    x2 = _x2(x)
    d = params.denom
    eb = params.epsilon * params.beta_bar
    return -0.5 * params.C * (x2 ** 2 - x2 / d - eb / d)


def u2(params, x):
    x2 = _x2(x)
    e, d = params.epsilon, params.denom
    return -0.5 * params.C * (x2 ** 2 - x2 * (1.0 + e * e * params.tau_bar) / d
                              - e * (params.beta_bar - e * params.tau_bar) / d)


def u1_extended(params, x, profile=None):
    """``u1`` on the whole rough domain.

    Quadratic above the interface, continued by its tangent line
    ``(C/2)(x2 + ε β̄)/(1 + ε β̄)`` in the sublayer, which makes the
    first-order composite vanish on the rough wall.
    """
    x = np.asarray(x, dtype=np.float64)
    x2 = x[..., 1]
    if profile is not None:
        e = params.epsilon
        floor = e * profile(x[..., 0] / e)
        if np.any(x2 < floor - 1e-12):
            raise OutOfDomain("point below the rough boundary")
    eb = params.epsilon * params.beta_bar
    inside = 0.5 * params.C * (1.0 - x2) * x2
    below = 0.5 * params.C * x2
    return np.where(x2 >= 0.0, inside, below) + 0.5 * params.C * eb * (1.0 - x2) / params.denom


def u1_extended_grad(params, x):
    x2 = _x2(x)
    g2 = np.where(x2 >= 0.0, 0.5 * params.C * (1.0 - 2.0 * x2), 0.5 * params.C) \
        - 0.5 * params.C * params.epsilon * params.beta_bar / params.denom
    return np.stack([np.zeros_like(g2), g2], axis=-1)


@dataclass(frozen=True, eq=False)
class ApproxField:
    params: WallLawParams
    order: str = "first"
    mode: str = "averaged"
    cell: object = None
    xi_in: object = None
    xi_out: object = None

    def __post_init__(self):
        if self.order not in ORDERS or self.mode not in MODES:
            raise ValueError(f"bad order/mode {self.order!r}/{self.mode!r}")
        if self.mode != "averaged" and self.cell is None:
            raise MissingCorrector("full boundary-layer modes need a cell solution")
        if self.mode == "full_neumann" and (self.xi_in is None or self.xi_out is None):
            raise MissingCorrector("full_neumann needs both vertical correctors")
        if self.mode == "full_neumann" and self.order == "second":
            raise ValueError("second-order composite is periodic only")
        if self.mode != "averaged" and self.order == "zeroth":
            raise ValueError("no zeroth-order composite")

    def __call__(self, x):
        if self.mode == "averaged":
            return {"zeroth": u0, "first": u1, "second": u2}[self.order](self.params, x)
        return full_bl(self, x)

    def micro(self, x):
        x = np.asarray(x, dtype=np.float64)
        return x / self.params.epsilon

    def xi_terms(self, x):
        """``ξ_in(x/ε) + ξ_out(x/ε)`` with the outlet image read at ``(L - x1)/ε``."""
        y = self.micro(x)
        y_out = np.stack([(self.params.L - x[..., 0]) / self.params.epsilon, y[..., 1]],
                         axis=-1)
        return eval_xi(self.xi_in, y) + eval_xi(self.xi_out, y_out)

    def xi_grad_terms(self, x):
        y = self.micro(x)
        y_out = np.stack([(self.params.L - x[..., 0]) / self.params.epsilon, y[..., 1]],
                         axis=-1)
        g = xi_gradient(self.xi_in, y)
        go = xi_gradient(self.xi_out, y_out)
        go[..., 0] = -go[..., 0]
        return g + go


def full_bl(approx, x):
    """Composite ``u + ε ∂u/∂x2(x1, 0) (β - β̄ [- ξ_in - ξ_out])(x/ε) [+ τ term]``."""
    if approx.mode == "averaged" or approx.cell is None:
        raise MissingCorrector("full_bl needs a full mode and a cell solution")
    pr, cell = approx.params, approx.cell
    x = np.asarray(x, dtype=np.float64)
    y = approx.micro(x)
    osc = cell.beta_at(y) - cell.beta_bar
    if approx.mode == "full_neumann":
        osc = osc - approx.xi_terms(x)
    if approx.order == "first":
        return u1_extended(pr, x) + pr.epsilon * pr.du1_wall() * osc
    out = u2(pr, x) + pr.epsilon * pr.du2_wall() * osc
    return out + 0.5 * pr.epsilon ** 2 * pr.d2u2() * (cell.tau_at(y) - cell.tau_bar)


def full_bl_grad(approx, x):
    """Gradient of the first-order composite (element-wise for mesh-based parts)."""
    if approx.order != "first":
        raise ValueError("gradient provided for the first-order composite only")
    pr, cell = approx.params, approx.cell
    x = np.asarray(x, dtype=np.float64)
    gosc = cell.beta_grad_at(approx.micro(x))
    if approx.mode == "full_neumann":
        gosc = gosc - approx.xi_grad_terms(x)
    # ε ∂u/∂x2 · ∇_x[w(x/ε)] = ∂u/∂x2 · ∇_y w
    return u1_extended_grad(pr, x) + pr.du1_wall() * gosc
