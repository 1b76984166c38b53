"""Exception types raised across the package."""


class RoughwallError(Exception):
    pass


class NonConvergence(RoughwallError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class BreakdownError(RoughwallError):
    """CG met a non-positive curvature, or the system has no Dirichlet anchor."""


class ConflictError(RoughwallError):
    pass


class OutOfDomain(RoughwallError):
    pass


class DomainError(RoughwallError, ValueError):
    pass


class InvalidGeometry(RoughwallError, ValueError):
    pass


class DegenerateDenominator(RoughwallError, ZeroDivisionError):
    pass


class MissingCorrector(RoughwallError):
    pass


class InsufficientDomain(RoughwallError):
    pass


class DegenerateFit(RoughwallError):
    pass


class ConfigError(RoughwallError, ValueError):
    pass
