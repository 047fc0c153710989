"""Exception hierarchy shared by all riverwse modules."""


class RiverWseError(Exception):
    """Base class for all errors raised by this package."""


class RasterFormatError(RiverWseError):
    """Malformed or unsupported raster file content."""


class OutOfBoundsError(RiverWseError):
    """Requested coordinate lies outside the usable raster extent."""


class NodataError(RiverWseError):
    """A sampled value would depend on a nodata pixel."""


class GeometryError(RiverWseError):
    """Invalid geometry input or empty geometric intersection."""


class DegenerateSeriesError(RiverWseError):
    """Outlier rejection removed every point; the edge line is unusable."""


class InsufficientDataError(RiverWseError):
    """Too few points for the requested statistic or fit."""


class UnderdeterminedError(RiverWseError):
    """Least-squares system has no unique solution."""


class IncompleteDataError(RiverWseError):
    """A required optional field (e.g. uncertainty) is missing."""


class IntegrityError(RiverWseError):
    """Stored metadata disagrees with the stored arrays."""


class ConfigError(RiverWseError):
    """Invalid run configuration (unknown key or bad value)."""
