"""hazefuse: wavelet, fractional-calculus and gradient-domain fusion enhancement
for hazy and underwater images, with a dark-channel-prior baseline."""

__version__ = "0.1.0"

from .errors import (
    ColorSpaceError,
    CorruptImageError,
    DegenerateInputError,
    HazefuseError,
    ImageIOError,
    NumericalError,
    ShapeMismatchError,
    UnreadableFileError,
    UnsupportedFormatError,
    UnwritablePathError,
    ZeroDimensionError,
)
from .image_core import ColorSpace, Image, load_image, save_image
from .pipelines import PipelineConfig, iterate, pa1_enhance, pa2_enhance, run_algorithm
from .dcp import DcpParams, dcp_dehaze
from .evaluation import MetricReport, report

__all__ = [
    "__version__",
    "ColorSpace",
    "Image",
    "load_image",
    "save_image",
    "PipelineConfig",
    "pa1_enhance",
    "pa2_enhance",
    "iterate",
    "run_algorithm",
    "DcpParams",
    "dcp_dehaze",
    "MetricReport",
    "report",
    "HazefuseError",
    "ImageIOError",
    "UnreadableFileError",
    "UnsupportedFormatError",
    "CorruptImageError",
    "ZeroDimensionError",
    "UnwritablePathError",
    "ColorSpaceError",
    "DegenerateInputError",
    "ShapeMismatchError",
    "NumericalError",
]
