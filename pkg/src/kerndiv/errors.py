"""Exception types shared across the package."""


class KerndivError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDataError(KerndivError):
    """A computation is undefined for the given data.

    Raised when embedded means coincide (no projection direction), a
    projected group has zero variance, or a sample admits no pairwise
    distance information.
    """


class ConvergenceError(KerndivError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class CalibrationError(KerndivError):
    """Bootstrap calibration could not produce the requested null sample."""


class DataFormatError(KerndivError):
    """Input data file could not be parsed; message names row/column."""
