"""Exception hierarchy shared by all modules."""


class LiYorkeError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LiYorkeError, ValueError):
    """Input lies outside the state space of the map (e.g. ``|z| >= 1`` on the disk)."""


class PrecisionExhausted(LiYorkeError):
    """Working precision is too low to certify the requested quantity."""


class NumericalRangeError(LiYorkeError, OverflowError):
    """A state or distance left the representable floating-point range."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(LiYorkeError, ValueError):
    """Invalid experiment configuration."""
