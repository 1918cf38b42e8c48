"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """An architectural parameter, fault location, or shape is invalid."""


class NonFiniteOperandError(ValueError):
    """An Inf/NaN word reached the integer datapath, which cannot represent it."""


class ModelFormatError(ValueError):
    """A model file is truncated, malformed, or carries invalid parameters."""
