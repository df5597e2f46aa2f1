"""Exception types shared across the package."""


class OpticschedError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(OpticschedError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedSizeError(OpticschedError, ValueError):
    """The requested node count is not supported by the algorithm."""


class CollectiveFormatError(OpticschedError, ValueError):
    """A collective document failed parsing or validation."""


class ConfigError(OpticschedError, ValueError):
    """An experiment config document failed parsing or validation."""


class InfeasibleDemandError(OpticschedError, RuntimeError):
    """Some communicating pair is unreachable on the given topology."""


class WrongMethodError(OpticschedError, RuntimeError):
    """The exact unique-path solver was called on a multipath topology."""


class TooLargeError(OpticschedError, RuntimeError):
    """The instance exceeds a hard guard (e.g. brute-force step count)."""


class InternalInvariantError(OpticschedError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
