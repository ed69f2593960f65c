"""Exception types shared across the toolkit."""


class TelokitError(Exception):
    """Base class for all telokit errors."""


class ConfigError(TelokitError):
    """Invalid configuration or run parameters (CLI exit code 1)."""


class DataError(TelokitError):
    """Malformed or unusable input data (CLI exit code 2)."""


class CapacityError(TelokitError):
    """Request exceeds a hard capacity limit (enumeration size, Bell order)."""


class UnsupportedLawError(TelokitError):
    """A closed-form routine was called with a law it does not cover."""


class InfeasibleError(TelokitError):
    """Requested constants do not exist for the given distribution."""


class SingularTailError(TelokitError):
    """Survival factor hit zero inside the evaluation range."""

    def __init__(self, message, largest_safe_x=None):
        super().__init__(message)
        self.largest_safe_x = largest_safe_x
