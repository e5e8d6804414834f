"""Image container, 8-bit file I/O, colour-space conversion and colour correction.

Images are held as ``float64`` arrays of shape ``(H, W, C)`` with ``C`` in
``{1, 3}`` and nominal range ``[0, 1]``. Every public operation returns a new
:class:`Image`; nothing is modified in place.
"""

from __future__ import annotations

import enum
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import (
    ColorSpaceError,
    CorruptImageError,
    DegenerateInputError,
    UnreadableFileError,
    UnsupportedFormatError,
    UnwritablePathError,
    ZeroDimensionError,
)

__all__ = [
    "ColorSpace",
    "Image",
    "load_image",
    "save_image",
    "rgb_to_xyz",
    "xyz_to_rgb",
    "luminance",
    "gray_world_correct",
    "percentile_stretch",
    "REC709_WEIGHTS",
]


class ColorSpace(enum.Enum):
    SRGB = "srgb"
    LINEAR_RGB = "linear_rgb"
    XYZ = "xyz"
    GRAY = "gray"


@dataclass(frozen=True, eq=False)
class Image:
    """An ``(H, W, C)`` floating-point image tagged with its colour space."""

    data: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ColorSpaceError(f"expected (H, W, 1|3) data, got shape {data.shape}")
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise ZeroDimensionError("image has a zero dimension")
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains NaN or Inf samples")
        if (data.shape[2] == 1) != (self.space is ColorSpace.GRAY):
            raise ColorSpaceError(
                f"{data.shape[2]}-channel data cannot carry tag {self.space.name}"
            )
        object.__setattr__(self, "data", data)

    @classmethod
    def gray(cls, data) -> "Image":
        return cls(np.asarray(data, dtype=np.float64), ColorSpace.GRAY)

    @classmethod
    def rgb(cls, data) -> "Image":
        return cls(np.asarray(data, dtype=np.float64), ColorSpace.SRGB)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def plane(self, c: int = 0) -> np.ndarray:
        """Return channel ``c`` as a 2-D array (a view)."""
        return self.data[:, :, c]

    def with_data(self, data: np.ndarray, space: ColorSpace | None = None) -> "Image":
        return Image(data, self.space if space is None else space)

    def clamped(self) -> "Image":
        return self.with_data(np.clip(self.data, 0.0, 1.0))


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _read_netpbm_header(buf: bytes) -> tuple[bytes, int, int, int, int]:
    """Parse a binary P5/P6 header; return (magic, width, height, maxval, offset)."""
    tokens: list[bytes] = []
    pos = 2
    n = len(buf)
    while len(tokens) < 3:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise CorruptImageError("truncated Netpbm header")
        tokens.append(buf[start:pos])
    if pos >= n or not buf[pos : pos + 1].isspace():
        raise CorruptImageError("truncated Netpbm header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise CorruptImageError(f"malformed Netpbm header: {exc}") from None
    return buf[:2], width, height, maxval, pos + 1


def _decode_netpbm(buf: bytes) -> np.ndarray:
    magic, width, height, maxval, offset = _read_netpbm_header(buf)
    if width == 0 or height == 0:
        raise ZeroDimensionError(f"Netpbm image is {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"only maxval 255 is supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    payload = buf[offset : offset + need]
    if len(payload) < need:
        raise CorruptImageError(f"Netpbm payload truncated: {len(payload)} of {need} bytes")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return arr


def _decode_png(path: Path, buf: bytes) -> np.ndarray:
    if len(buf) >= 24 and buf[12:16] == b"IHDR":
        width, height = struct.unpack(">II", buf[16:24])
        if width == 0 or height == 0:
            raise ZeroDimensionError(f"PNG image is {width}x{height}")
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I", "F"):
                raise UnsupportedFormatError(f"PNG mode {mode} is not 8-bit")
            if mode not in ("L", "RGB"):
                im = im.convert("L" if mode in ("1", "LA") else "RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnsupportedFormatError, ZeroDimensionError):
        raise
    except Exception as exc:  # Pillow raises a zoo of types for damaged payloads
        raise CorruptImageError(f"cannot decode PNG {path}: {exc}") from None
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def load_image(path) -> Image:
    """Read an 8-bit PNG, PPM (P6) or PGM (P5) file into a ``[0, 1]`` image.

    Raises
    ------
    UnreadableFileError
        Missing file, directory, or permission problem.
    UnsupportedFormatError
        Not PNG/P5/P6, or not 8 bits per sample.
    CorruptImageError
        Recognised header but truncated or malformed payload.
    ZeroDimensionError
        Width or height of zero.
    """
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc.strerror or exc}") from None

    if buf.startswith(_PNG_MAGIC):
        arr = _decode_png(path, buf)
    elif buf[:2] in (b"P5", b"P6"):
        arr = _decode_netpbm(buf)
    elif 0 < len(buf) < len(_PNG_MAGIC) and _PNG_MAGIC.startswith(buf):
        raise CorruptImageError(f"{path} is truncated inside the PNG signature")
    else:
        raise UnsupportedFormatError(f"{path} is not a PNG, PPM or PGM file")

    data = arr.astype(np.float64) / 255.0
    space = ColorSpace.SRGB if data.shape[2] == 3 else ColorSpace.GRAY
    return Image(data, space)


def quantize(data: np.ndarray) -> np.ndarray:
    """Clamp to ``[0, 1]`` and round half-up to 8-bit codes."""
    return np.floor(np.clip(data, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: Image, path) -> None:
    """Write ``img`` as PNG, PPM or PGM, chosen by file extension."""
    path = Path(path)
    codes = quantize(img.data)
    ext = path.suffix.lower()
    if ext == ".png":
        fmt = "PNG"
    elif ext in (".ppm", ".pgm", ".pnm"):
        fmt = "PPM"
        if ext == ".ppm" and img.channels != 3:
            raise UnsupportedFormatError("PPM output needs a 3-channel image")
        if ext == ".pgm" and img.channels != 1:
            raise UnsupportedFormatError("PGM output needs a 1-channel image")
    else:
        raise UnsupportedFormatError(f"unknown output extension {ext!r}")
    pil = PILImage.fromarray(codes[:, :, 0] if img.channels == 1 else codes)
    try:
        pil.save(path, format=fmt)
    except OSError as exc:
        raise UnwritablePathError(f"cannot write {path}: {exc}") from None


# ---------------------------------------------------------------------------
# Colour spaces
# ---------------------------------------------------------------------------

# IEC 61966-2-1 sRGB -> XYZ (D65), as published to four decimals.
_RGB2XYZ = np.array(
    [
        [0.4124, 0.3576, 0.1805],
        [0.2126, 0.7152, 0.0722],
        [0.0193, 0.1192, 0.9505],
    ]
)
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)

REC709_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def srgb_decode(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def srgb_encode(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.where(
        v <= 0.0031308, 12.92 * v, 1.055 * np.power(np.maximum(v, 0.0031308), 1 / 2.4) - 0.055
    )


def _require(img: Image, channels: int, *spaces: ColorSpace) -> None:
    if img.channels != channels:
        raise ColorSpaceError(f"expected {channels} channels, got {img.channels}")
    if spaces and img.space not in spaces:
        names = "|".join(s.name for s in spaces)
        raise ColorSpaceError(f"expected {names} image, got {img.space.name}")


def rgb_to_xyz(img: Image) -> Image:
    _require(img, 3, ColorSpace.SRGB)
    lin = srgb_decode(np.clip(img.data, 0.0, 1.0))
    return Image(lin @ _RGB2XYZ.T, ColorSpace.XYZ)


def xyz_to_rgb(img: Image) -> Image:
    """Inverse of :func:`rgb_to_xyz`; out-of-gamut colours are clamped."""
    _require(img, 3, ColorSpace.XYZ)
    lin = np.clip(img.data @ _XYZ2RGB.T, 0.0, 1.0)
    return Image(np.clip(srgb_encode(lin), 0.0, 1.0), ColorSpace.SRGB)


def luminance(img: Image) -> Image:
    """Rec. 709 weighted sum of the three channels (no linearisation)."""
    if img.channels == 1:
        raise ColorSpaceError("luminance needs a 3-channel image")
    _require(img, 3, ColorSpace.SRGB, ColorSpace.LINEAR_RGB)
    return Image(img.data @ REC709_WEIGHTS, ColorSpace.GRAY)


# ---------------------------------------------------------------------------
# Colour correction
# ---------------------------------------------------------------------------


def gray_world_correct(img: Image) -> Image:
    """Scale each channel so all channel means equal their common average.

    Raises :class:`DegenerateInputError` if any channel has zero mean.
    """
    _require(img, 3, ColorSpace.SRGB, ColorSpace.LINEAR_RGB)
    means = img.data.reshape(-1, 3).mean(axis=0)
    if np.any(means <= 0.0):
        raise DegenerateInputError(f"channel mean is zero: {means.tolist()}")
    gains = means.mean() / means
    return img.with_data(np.clip(img.data * gains, 0.0, 1.0))


def percentile_stretch(img: Image, lo: float = 1.0, hi: float = 99.0) -> Image:
    """Per-channel linear map sending the ``lo``/``hi`` percentiles to 0/1.

    Channels whose two percentiles coincide are passed through unchanged.
    """
    if not 0.0 <= lo < hi <= 100.0:
        raise ValueError(f"need 0 <= lo < hi <= 100, got lo={lo}, hi={hi}")
    out = img.data.copy()
    for c in range(img.channels):
        plane = img.data[:, :, c]
        p_lo, p_hi = np.percentile(plane, [lo, hi])
        if p_hi > p_lo:
            out[:, :, c] = np.clip((plane - p_lo) / (p_hi - p_lo), 0.0, 1.0)
    return img.with_data(out)


def ensure_writable_dir(path) -> None:
    """Create the parent directory of ``path`` if missing."""
    parent = os.path.dirname(os.fspath(path))
    if parent:
        try:
            os.makedirs(parent, exist_ok=True)
        except OSError as exc:
            raise UnwritablePathError(f"cannot create {parent}: {exc}") from None
