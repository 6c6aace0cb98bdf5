"""Exception types shared across the package."""


class LdgError(Exception):
    """Base class for package-specific errors."""


class FrameError(LdgError, ValueError):
    """A supplied eigenvector frame is not orthonormal."""


class RegimeError(LdgError, ValueError):
    """An operation was evaluated outside its valid temperature regime."""


class NormalizationError(LdgError, ValueError):
    """A distribution violates its normalization or positivity contract."""


class ConfigError(LdgError, ValueError):
    """Malformed run configuration; the message carries line diagnostics."""


class FieldFormatError(LdgError, ValueError):
    """Malformed field file; the message carries line/site diagnostics."""


class DivergenceError(LdgError, RuntimeError):
    """The gradient flow produced a non-finite energy."""
