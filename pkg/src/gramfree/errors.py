"""Exception types raised by gramfree."""


class GramFreeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GramFreeError, ValueError):
    """Vectors of different truncation dimensions were mixed."""


class EmptyInputError(GramFreeError, ValueError):
    """An operation that needs at least one vector got none."""


class ConfigError(GramFreeError, ValueError):
    """Invalid configuration, sampler description or engine parameter."""


class NotAbsolutelyContinuousError(GramFreeError, ValueError):
    """A law has no density with respect to the base Gaussian measure."""


class MergeError(GramFreeError, ValueError):
    """Reports cannot be merged (different configs or overlapping trials)."""
