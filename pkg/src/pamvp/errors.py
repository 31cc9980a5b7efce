"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class OutsideRegionError(DomainError):
    """Point lies outside the certified hodographic region."""


class InversionError(RuntimeError):
    """A numerical inversion did not converge.

    ``last_iterate`` carries whatever the solver had when it gave up, so the
    caller can inspect how far off it was.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class CalibrationError(RuntimeError):
    """No tested radius satisfies the validity conditions."""


class FitError(ValueError):
    """Not enough usable points for a decay fit."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, grad_norm=None):
        super().__init__(message)
        self.grad_norm = grad_norm


class ConfigError(ValueError):
    """Malformed campaign configuration."""
