"""Exception hierarchy shared by all modules."""


class GranularKineticsError(Exception):
    """Base class for every error raised by this package."""


class InvalidLatticeError(GranularKineticsError, ValueError):
    pass


class InvalidUnitsError(GranularKineticsError, ValueError):
    pass


class DomainError(GranularKineticsError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(GranularKineticsError, ValueError):
    pass


class StabilityError(GranularKineticsError, ValueError):
    """The time step violates the explicit-scheme invariance bound."""


class BoundaryError(GranularKineticsError, ValueError):
    """Boundary data are not admissible at the queried time."""


class ConvergenceError(GranularKineticsError, RuntimeError):
    """Steady-state iteration did not reach tolerance.

    ``residual`` carries the last residual and ``state`` the last iterate so
    callers can inspect how far the run got.
    """

    def __init__(self, message, residual=float("nan"), steps=0, state=None):
        super().__init__(message)
        self.residual = residual
        self.steps = steps
        self.state = state
