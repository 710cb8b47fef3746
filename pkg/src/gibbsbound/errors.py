"""Exception types shared across the package."""


class GibbsboundError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(GibbsboundError):
    """A configuration's shape does not match what the operation requires."""


class OverlapError(ShapeError):
    """Two configurations being joined assign sites in common."""


class NotAdmissibleError(GibbsboundError):
    """A boundary condition admits no positive-weight interior filling."""


class DegenerateModelError(GibbsboundError):
    """The model admits no positive-weight configuration for the request."""


class UnsupportedDimensionError(GibbsboundError):
    """The operation is only implemented for a specific lattice dimension."""


class EnumerationCapError(GibbsboundError):
    """An exhaustive enumeration would exceed its configured cap."""


class ModelFormatError(GibbsboundError):
    """A model description file is malformed; the message names the field."""
