"""Exception and warning types shared across the package."""


class SzegoscatError(Exception):
    """Base class for all package errors."""


class DomainError(SzegoscatError, ValueError):
    """An input lies outside the mathematical domain of an operation.

    Carries the offending ``index`` when the violation is tied to one
    entry of a sequence.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(SzegoscatError, ValueError):
    """A numerical configuration (grid size, window, kappa, ...) is unusable."""


class PreconditionError(SzegoscatError, ValueError):
    """An operation was called outside the regime where its statement applies."""


class OracleMismatch(SzegoscatError, RuntimeError):
    """Two independent routes for the same quantity disagree."""


class TruncationWarning(RuntimeWarning):
    """A truncated computation changed by more than tolerance under doubling."""
