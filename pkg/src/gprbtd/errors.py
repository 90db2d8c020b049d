"""Exception types shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class GprError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GprError):
    """Invalid configuration: unknown key, bad type, out-of-range value."""


class DataError(GprError):
    """Invalid data or arguments: bad shapes, out-of-bounds alarms, degenerate inputs."""


class NotTrainedError(GprError):
    """Inference requested from a model that has not been trained."""
