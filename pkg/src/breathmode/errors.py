"""Exception hierarchy shared by all engines."""


class BreathingModeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BreathingModeError, ValueError):
    """Input outside the domain of an operation."""


class SingularityError(DomainError):
    """A potential evaluated to a non-finite value on a grid node."""


class DegenerateSystemError(DomainError):
    """Corrected moments are not positive (system is pure centre of mass)."""


class UnavailableError(BreathingModeError, LookupError):
    """A requested moment or estimator cannot be formed from the data."""


class ConvergenceError(BreathingModeError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class ResolutionError(ConvergenceError):
    """Grid refinement did not converge the target eigenvalue."""


class CutoffError(ConvergenceError):
    """Oscillator basis cutoff too small for the requested accuracy."""


class ContinuationError(ConvergenceError):
    """A link in a coupling-continuation chain failed.

    ``failed_lambda`` holds the coupling at which the chain broke.
    """

    def __init__(self, message, failed_lambda=None):
        super().__init__(message)
        self.failed_lambda = failed_lambda
