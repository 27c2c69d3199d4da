"""Exception types raised by the numerical routines."""


class DiracMagError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DiracMagError, ValueError):
    """An argument lies outside the domain of the requested function."""


class StateError(DiracMagError, ValueError):
    """Invalid quantum numbers, or a state that does not exist at the given charge."""


class NonConvergenceError(DiracMagError, ArithmeticError):
    """A series or iteration cannot converge for the given parameters."""


class PrecisionLossError(DiracMagError, ArithmeticError):
    """The requested tolerance could not be reached within the work limits.

    ``estimate`` carries the best value obtained and ``error`` its error
    estimate, so callers may still inspect what was achieved.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class QuadratureError(DiracMagError, ArithmeticError):
    """Node finding or order-doubling convergence of a quadrature failed."""


class OracleError(DiracMagError, ArithmeticError):
    """An internal consistency check inside a verification routine failed."""
