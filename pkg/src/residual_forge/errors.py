"""Exception types shared across the package."""


class ResidualForgeError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedFormatError(ResidualForgeError):
    """Image file uses a feature we do not handle (named in the message)."""


class ImageTooSmallError(ResidualForgeError):
    """Image is below the minimum size an operation requires."""


class ShapeMismatchError(ResidualForgeError):
    """Two images that must share dimensions do not."""


class PatchTooSmallError(ResidualForgeError):
    """Requested patch size is below the 8 px minimum."""


class InvalidBoundsError(ResidualForgeError):
    """Feasibility bounds violate a < b."""


class InvalidConfigError(ResidualForgeError):
    """Optimizer or loss configuration is out of its valid range."""


class DegenerateAlphaError(ResidualForgeError):
    """Operation requires alpha < 1 (residual must have some effect)."""
