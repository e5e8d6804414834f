"""Dark-channel-prior dehazing baseline with guided-filter refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ColorSpaceError, DegenerateInputError
from .image_core import REC709_WEIGHTS, Image

__all__ = [
    "DcpParams",
    "dark_channel",
    "estimate_airlight",
    "box_mean",
    "guided_filter",
    "transmission",
    "dcp_dehaze",
]


@dataclass(frozen=True)
class DcpParams:
    patch: int = 7
    omega: float = 0.95
    t_floor: float = 0.1
    airlight_fraction: float = 0.001
    guided_radius: int = 20
    guided_eps: float = 1e-3

    def __post_init__(self):
        if not 0 < self.t_floor < 1:
            raise ValueError(f"t_floor must lie in (0, 1), got {self.t_floor}")
        if not 0 < self.omega <= 1:
            raise ValueError(f"omega must lie in (0, 1], got {self.omega}")
        if not 0 < self.airlight_fraction <= 1:
            raise ValueError(f"airlight_fraction must lie in (0, 1], got {self.airlight_fraction}")
        if self.patch < 0 or self.guided_radius < 0:
            raise ValueError("radii must be non-negative")


def _rgb_array(img) -> np.ndarray:
    data = img.data if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    if data.ndim != 3 or data.shape[2] != 3:
        raise ColorSpaceError(f"expected a 3-channel image, got shape {data.shape}")
    return data


def dark_channel(img, radius: int = 7) -> np.ndarray:
    """Channel minimum followed by a ``(2r+1)^2`` minimum filter (edge-replicated)."""
    data = img.data if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    mins = data.min(axis=2) if data.ndim == 3 else data
    return ndimage.minimum_filter(mins, size=2 * radius + 1, mode="nearest")


def estimate_airlight(img, dark: np.ndarray, fraction: float = 0.001) -> np.ndarray:
    """RGB of the most luminous pixel among the haziest ``fraction`` of pixels."""
    data = _rgb_array(img)
    flat = data.reshape(-1, 3)
    count = max(1, math.ceil(fraction * flat.shape[0]))
    order = np.argsort(-dark.ravel(), kind="stable")[:count]
    lum = flat[order] @ REC709_WEIGHTS
    return flat[order[int(np.argmax(lum))]].copy()


def box_mean(x: np.ndarray, r: int) -> np.ndarray:
    """Mean over the ``(2r+1)^2`` window clipped to the image."""
    h, w = x.shape

    def window_sum(a):
        c = np.zeros((h + 1, w + 1))
        c[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
        i0 = np.clip(np.arange(h) - r, 0, h)
        i1 = np.clip(np.arange(h) + r + 1, 0, h)
        j0 = np.clip(np.arange(w) - r, 0, w)
        j1 = np.clip(np.arange(w) + r + 1, 0, w)
        return (
            c[i1][:, j1] - c[i0][:, j1] - c[i1][:, j0] + c[i0][:, j0]
        )

    return window_sum(x) / window_sum(np.ones_like(x))


def guided_filter(src: np.ndarray, guide: np.ndarray, radius: int, eps: float) -> np.ndarray:
    """Edge-aware smoothing of ``src`` by a locally linear model of ``guide``.

    For every window ``k`` a ridge fit ``src ~ a_k * guide + b_k`` is made;
    each output pixel averages the predictions of all windows covering it.
    """
    src = np.asarray(src, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    if src.shape != guide.shape:
        raise ValueError(f"src {src.shape} and guide {guide.shape} differ in shape")
    mean_i = box_mean(guide, radius)
    mean_p = box_mean(src, radius)
    cov_ip = box_mean(guide * src, radius) - mean_i * mean_p
    var_i = box_mean(guide * guide, radius) - mean_i * mean_i
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    return box_mean(a, radius) * guide + box_mean(b, radius)


def transmission(img, airlight, p: DcpParams = DcpParams()) -> np.ndarray:
    data = _rgb_array(img)
    airlight = np.asarray(airlight, dtype=np.float64)
    if np.any(airlight <= 0):
        raise DegenerateInputError(f"airlight has a non-positive channel: {airlight.tolist()}")
    raw = 1.0 - p.omega * dark_channel(data / airlight, p.patch)
    refined = guided_filter(raw, data @ REC709_WEIGHTS, p.guided_radius, p.guided_eps)
    return np.clip(refined, p.t_floor, 1.0)


def dcp_dehaze(img: Image, p: DcpParams = DcpParams()) -> Image:
    """Invert the haze model with the estimated airlight and transmission."""
    data = _rgb_array(img)
    airlight = estimate_airlight(data, dark_channel(data, p.patch), p.airlight_fraction)
    airlight = np.maximum(airlight, 1.0 / 255.0)  # black frames would otherwise divide by zero
    t = transmission(data, airlight, p)
    out = (data - airlight) / np.maximum(t, p.t_floor)[:, :, None] + airlight
    return img.with_data(np.clip(out, 0.0, 1.0))
