"""Exception hierarchy shared across the package."""


class HazefuseError(Exception):
    """Base class for every error raised by hazefuse."""


class ImageIOError(HazefuseError):
    """Base class for file-boundary failures."""


class UnreadableFileError(ImageIOError):
    """The path does not exist or cannot be opened for reading."""


class UnsupportedFormatError(ImageIOError):
    """The file is readable but is not an 8-bit PNG/PPM/PGM image."""


class CorruptImageError(ImageIOError):
    """The header was recognised but the payload is truncated or malformed."""


class ZeroDimensionError(ImageIOError):
    """The image declares a zero width or height."""


class UnwritablePathError(ImageIOError):
    """The output path cannot be written."""


class ColorSpaceError(HazefuseError, ValueError):
    """Wrong channel count or colour-space tag for the requested operation."""


class DegenerateInputError(HazefuseError, ValueError):
    """Input violates a numerical precondition (e.g. a zero-mean channel)."""


class ShapeMismatchError(HazefuseError, ValueError):
    """Co-registered inputs do not share the same shape."""


class NumericalError(HazefuseError, ArithmeticError):
    """A solver missed its residual bound or produced non-finite values."""
