class ConfigurationError(ValueError):
    """A parameter is outside its valid range."""


class InputShapeError(ValueError):
    """An array has the wrong length or shape for the operation."""


class UndefinedPaprError(ValueError):
    """PAPR was requested for an all-zero signal."""


class DegenerateThresholdError(ValueError):
    """The optimized-threshold denominator is not positive."""
