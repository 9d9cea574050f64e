"""District-based election simulator with elector-satisfaction fairness measures."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ElectsimError,
    EmptyDistrictError,
    InvalidParameterError,
    MalformedRecordsError,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ElectsimError",
    "EmptyDistrictError",
    "InvalidParameterError",
    "MalformedRecordsError",
]
