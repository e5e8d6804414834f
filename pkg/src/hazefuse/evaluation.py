"""Image-quality metrics, synthetic degradations and a synthetic scene corpus.

Metric CSV columns, in order::

    entropy, avg_gradient, rms_contrast, local_contrast,
    colorfulness, dark_channel_mean, rmse_to_reference

``rmse_to_reference`` is an empty field when no reference was supplied.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import ndimage

from .dcp import dark_channel
from .errors import ShapeMismatchError
from .image_core import REC709_WEIGHTS, ColorSpace, Image

__all__ = [
    "METRIC_COLUMNS",
    "MetricReport",
    "HazeModel",
    "luma",
    "entropy",
    "avg_gradient",
    "rms_contrast",
    "local_contrast",
    "colorfulness",
    "dark_channel_mean",
    "rmse",
    "report",
    "apply_haze",
    "apply_underwater_cast",
    "CAST_PRESETS",
    "synthetic_scene",
    "synthetic_corpus",
]

LOCAL_TILE = 16
DARK_RADIUS = 7


def luma(img: Image) -> np.ndarray:
    """Rec. 709 luminance of an RGB image, or the single plane of a gray one."""
    if img.channels == 1:
        return img.plane(0)
    return img.data @ REC709_WEIGHTS


def entropy(img: Image) -> float:
    """Shannon entropy (bits) of the 256-bin histogram of 8-bit luminance codes."""
    codes = np.floor(np.clip(luma(img), 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)
    p = np.bincount(codes.ravel(), minlength=256) / codes.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def avg_gradient(img: Image) -> float:
    """Mean of ``sqrt((gx^2 + gy^2) / 2)`` over luminance forward differences.

    Each 2x2 block contributes the average over its four corner-anchored
    stencils (top or bottom row difference paired with left or right column
    difference). A single top-left stencil would change under flips; the
    symmetric average does not, and agrees with it on ramps and checkerboards.
    """
    y = luma(img)
    if y.shape[0] < 2 or y.shape[1] < 2:
        return 0.0
    h2 = ((y[:-1, 1:] - y[:-1, :-1]) ** 2, (y[1:, 1:] - y[1:, :-1]) ** 2)
    v2 = ((y[1:, :-1] - y[:-1, :-1]) ** 2, (y[1:, 1:] - y[:-1, 1:]) ** 2)
    total = sum(np.sqrt((h + v) / 2.0) for h in h2 for v in v2)
    return float(np.mean(total) / 4.0)


def rms_contrast(img: Image) -> float:
    return float(np.std(luma(img)))


def local_contrast(img: Image, tile: int = LOCAL_TILE) -> float:
    """Mean luminance standard deviation over every ``tile x tile`` window.

    All window positions are used (stride 1), which keeps the metric exactly
    invariant under flips regardless of image size.
    """
    y = luma(img)
    y = y - y.min()  # variance is shift-invariant; this makes constants exact zeros
    th, tw = min(tile, y.shape[0]), min(tile, y.shape[1])
    mean = ndimage.uniform_filter(y, size=(th, tw), mode="constant")
    mean_sq = ndimage.uniform_filter(y * y, size=(th, tw), mode="constant")
    # uniform_filter centres windows; keep only fully interior positions.
    r0, c0 = th // 2, tw // 2
    r1, c1 = y.shape[0] - (th - 1 - th // 2), y.shape[1] - (tw - 1 - tw // 2)
    var = np.maximum(mean_sq[r0:r1, c0:c1] - mean[r0:r1, c0:c1] ** 2, 0.0)
    return float(np.mean(np.sqrt(var)))


def colorfulness(img: Image) -> float:
    """Hasler-Suesstrunk colourfulness on ``[0, 1]`` samples (0 for gray images)."""
    if img.channels == 1:
        return 0.0
    r, g, b = (img.data[:, :, c] for c in range(3))
    rg = r - g
    yb = 0.5 * (r + g) - b
    return float(np.hypot(rg.std(), yb.std()) + 0.3 * np.hypot(rg.mean(), yb.mean()))


def dark_channel_mean(img: Image, radius: int = DARK_RADIUS) -> float:
    return float(dark_channel(img, radius).mean())


def rmse(a: Image, b: Image) -> float:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a.data - b.data) ** 2)))


@dataclass(frozen=True)
class MetricReport:
    entropy: float
    avg_gradient: float
    rms_contrast: float
    local_contrast: float
    colorfulness: float
    dark_channel_mean: float
    rmse_to_reference: float | None = None

    def as_row(self) -> list[str]:
        return [
            "" if v is None else f"{v:.10g}"
            for v in (getattr(self, f.name) for f in fields(self))
        ]

    def as_dict(self) -> dict:
        return asdict(self)


METRIC_COLUMNS = [f.name for f in fields(MetricReport)]


def report(img: Image, reference: Image | None = None) -> MetricReport:
    if reference is not None and reference.shape != img.shape:
        raise ShapeMismatchError(f"reference shape {reference.shape} != image shape {img.shape}")
    return MetricReport(
        entropy=entropy(img),
        avg_gradient=avg_gradient(img),
        rms_contrast=rms_contrast(img),
        local_contrast=local_contrast(img),
        colorfulness=colorfulness(img),
        dark_channel_mean=dark_channel_mean(img),
        rmse_to_reference=None if reference is None else rmse(img, reference),
    )


# ---------------------------------------------------------------------------
# Degradations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HazeModel:
    """Koschmieder haze: ``I = J t + A (1 - t)``.

    ``t`` may be a scalar or an ``(H, W)`` map; ``airlight`` a scalar or an
    RGB triple.
    """

    t: float | np.ndarray
    airlight: float | tuple[float, float, float] = 0.85

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        if np.any(t <= 0) or np.any(t > 1):
            raise ValueError("transmission must lie in (0, 1]")
        a = np.asarray(self.airlight, dtype=np.float64)
        if np.any(a < 0) or np.any(a > 1):
            raise ValueError("airlight must lie in [0, 1]")


def apply_haze(clean: Image, model: HazeModel) -> Image:
    t = np.asarray(model.t, dtype=np.float64)
    if t.ndim == 2:
        t = t[:, :, None]
    a = np.broadcast_to(np.asarray(model.airlight, dtype=np.float64), (clean.channels,))
    return clean.with_data(clean.data * t + a * (1.0 - t))


CAST_PRESETS = {
    "green": (0.3, 0.9, 0.8),
    "blue": (0.3, 0.8, 0.9),
}


def apply_underwater_cast(clean: Image, attenuation) -> Image:
    att = np.asarray(attenuation, dtype=np.float64)
    if att.shape != (3,) or np.any(att <= 0) or np.any(att > 1):
        raise ValueError(f"attenuation must be three values in (0, 1], got {attenuation}")
    if clean.channels != 3:
        raise ValueError("a colour cast needs a 3-channel image")
    return clean.with_data(clean.data * att)


# ---------------------------------------------------------------------------
# Synthetic scenes
# ---------------------------------------------------------------------------


def synthetic_scene(seed: int, size: int = 128) -> Image:
    """A deterministic colourful test scene with edges, shading and texture.

    Smooth coloured illumination, a handful of saturated rectangles and
    discs, a dark foreground band and fine band-limited texture. Each scene
    contains near-black and near-white regions so haze visibly compresses
    its range.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)

    # Achromatic shading with a faint random tint, so scenes roughly obey
    # the gray-world assumption the way natural images do on average.
    a, b, ph = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0, 2 * np.pi)
    shading = 0.45 + 0.25 * np.sin(np.pi * (a * xx + b * yy) + ph)
    img = shading[:, :, None] * rng.uniform(0.9, 1.1, 3)

    for _ in range(int(rng.integers(4, 8))):
        color = rng.uniform(0.0, 1.0, 3)
        color[rng.integers(3)] *= 0.1  # saturated: one weak channel
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, size - 16, 2)
            hh, ww = rng.integers(12, size // 2, 2)
            img[y0 : y0 + hh, x0 : x0 + ww] = color
        else:
            cy, cx = rng.uniform(0.15, 0.85, 2)
            rad = rng.uniform(0.06, 0.2)
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 < rad**2
            img[mask] = color

    # Dark, textured foreground and a bright highlight.
    band = yy > rng.uniform(0.75, 0.9)
    img[band] *= 0.15
    cy, cx = rng.uniform(0.1, 0.4, 2)
    img[(yy - cy) ** 2 + (xx - cx) ** 2 < 0.004] = 0.97

    texture = ndimage.gaussian_filter(rng.standard_normal((size, size)), 1.0)
    texture /= np.abs(texture).max()
    img += 0.06 * texture[:, :, None]
    return Image(np.clip(img, 0.0, 1.0), ColorSpace.SRGB)


def synthetic_corpus(n: int = 5, size: int = 128, seed: int = 0) -> list[Image]:
    return [synthetic_scene(seed + k, size) for k in range(n)]
