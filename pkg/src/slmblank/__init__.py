"""SLM-assisted blanking for impulsive-noise mitigation in OFDM power-line links."""

from slmblank.errors import (
    ConfigurationError,
    DegenerateThresholdError,
    InputShapeError,
    UndefinedPaprError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DegenerateThresholdError",
    "InputShapeError",
    "UndefinedPaprError",
    "__version__",
]
