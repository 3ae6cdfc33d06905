"""Exception types shared across the laboratory modules."""


class HHLabError(Exception):
    """Base class for all laboratory errors."""


class KernelDomainError(HHLabError, ValueError):
    """Kernel order or evaluation point outside the admissible domain."""


class QuadratureError(HHLabError, RuntimeError):
    """A quadrature estimate failed to converge within its budget."""


class GridError(HHLabError, ValueError):
    """Grid is malformed or too coarse for the requested operation."""


class NonIntegrableSourceError(HHLabError, ValueError):
    """Radial source is not integrable against r^(n-1) near the origin."""


class ExtrapolationError(HHLabError, ValueError):
    """Requested evaluation range exceeds the field's grid."""


class ConvergenceError(HHLabError, RuntimeError):
    """An iterative solver did not converge within its iteration budget."""


class BracketError(HHLabError, RuntimeError):
    """Amplitude bisection could not bracket a nontrivial fixed point."""


class IntegratorError(HHLabError, RuntimeError):
    """Adaptive ODE integration failed (step-size underflow or budget)."""
