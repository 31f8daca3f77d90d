"""Exception types shared across the package."""


class KaccyclesError(Exception):
    """Base class for all package-specific failures."""


class DomainError(KaccyclesError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ZeroPolynomialError(KaccyclesError, ValueError):
    """All coefficients are zero; the root count is undefined."""


class DegreeTooLargeError(KaccyclesError, ValueError):
    """Polynomial degree exceeds the guard for exact-arithmetic methods."""


class QuadratureFailureError(KaccyclesError, RuntimeError):
    """Adaptive quadrature could not meet the requested tolerance."""


class EscapeError(KaccyclesError, RuntimeError):
    """An ODE trajectory left the admissible radial region."""


class NoReturnError(KaccyclesError, RuntimeError):
    """An ODE trajectory failed to return to the positive x-axis in time."""


class NonConvergentError(KaccyclesError, RuntimeError):
    """An iterative refinement schedule ran out without stabilizing."""


class InsufficientDataError(KaccyclesError, ValueError):
    """Not enough data points for the requested statistical analysis."""
