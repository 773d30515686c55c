"""Exception hierarchy shared across the package."""


class CvttError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CvttError):
    """Invalid configuration: unknown keys, bad schema, out-of-range settings."""


class DataError(CvttError):
    """Problem with the data itself: missing files, empty splits, degenerate folds."""


class FitError(CvttError):
    """Model fitting failed, e.g. non-finite values during optimization."""
