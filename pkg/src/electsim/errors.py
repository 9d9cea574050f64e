class ElectsimError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(ElectsimError, ValueError):
    pass


class EmptyDistrictError(ElectsimError, ValueError):
    pass


class MalformedRecordsError(ElectsimError, ValueError):
    pass


class ConfigError(ElectsimError, ValueError):
    """Configuration file is missing, unparsable or fails validation."""
