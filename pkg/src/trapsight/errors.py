"""Exception types shared across the package."""


class TrapSightError(Exception):
    """Base class for all trapsight errors."""


class DimensionMismatchError(TrapSightError):
    """Two frames that must share dimensions do not."""


class ConfigError(TrapSightError):
    """A tunable (threshold, area bound, ...) violates its invariants."""


class ImageFormatError(TrapSightError):
    """Bytes or a file could not be decoded as a supported image."""


class StorageError(TrapSightError):
    """A persistence operation failed or found inconsistent state."""
