"""Exception types shared across the toolkit."""


class SlumkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidPolygon(SlumkitError):
    """Polygon has fewer than 3 vertices, non-finite coordinates, or
    coincident consecutive vertices."""


class MalformedRle(SlumkitError):
    """Run-length encoding whose runs are negative, non-canonical, or do not
    sum to width*height."""


class DimensionMismatch(SlumkitError):
    """Two rasters that must share dimensions do not."""


class EmptyMask(SlumkitError):
    """An operation that needs at least one set pixel got an empty mask."""


class ParseError(SlumkitError):
    """Input file is not valid JSON or has the wrong top-level structure."""


class ValidationError(SlumkitError):
    """Input parsed but violates a dataset or prediction invariant."""


class UnknownScene(SlumkitError):
    """A scene id does not resolve to any scene in the dataset."""


class ImageLoadError(SlumkitError):
    """Scene image file missing or unreadable."""


class InvalidConfig(SlumkitError):
    """Configuration with an empty, inverted, or out-of-bounds range."""


class InvalidProbability(SlumkitError):
    """Mask probability outside [0, 1] before clamping."""


class NonDifferentiablePoint(SlumkitError):
    """Finite-difference check requested at a point too close to a kink or
    clamp boundary."""
