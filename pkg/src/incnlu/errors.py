"""Exception types shared across the package."""


class IncnluError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidPayloadError(IncnluError):
    """A word payload is empty, contains whitespace, or is missing."""


class BufferUnderflowError(IncnluError):
    """Revoke requested while the hypothesis is empty."""


class ConsistencyError(IncnluError):
    """Internal state diverged from the edit stream; indicates a caller bug."""


class ConfigError(IncnluError):
    """Pipeline configuration is malformed or names an unknown component."""


class DataError(IncnluError):
    """Training data is missing, malformed, or fails validation."""


class ParameterError(IncnluError):
    """A hyperparameter or flag value is outside its allowed range."""


class BundleError(IncnluError):
    """A model bundle cannot be persisted or loaded."""
