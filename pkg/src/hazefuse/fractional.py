"""Grünwald-Letnikov fractional differences and fractional gradient fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GLMask",
    "GradientField",
    "gl_coefficients",
    "frac_gradient",
    "frac_boost_subband",
]


@dataclass(frozen=True)
class GLMask:
    alpha: float
    coeffs: np.ndarray

    @property
    def taps(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        if self.gx.shape != self.gy.shape:
            raise ValueError(f"gx {self.gx.shape} and gy {self.gy.shape} differ in shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.shape

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.gx, self.gy)

    def __mul__(self, k: float) -> "GradientField":
        return GradientField(self.gx * k, self.gy * k)

    __rmul__ = __mul__


def gl_coefficients(alpha: float, taps: int = 8) -> GLMask:
    """Coefficients ``c_0 .. c_taps`` of the truncated GL difference of order ``alpha``.

    ``c_k = c_{k-1} * (k - alpha - 1) / k``, which equals the recurrence
    ``c_{k-1} * (1 - (alpha + 1) / k)`` but keeps integer orders exact: the
    signed binomial row followed by exact zeros.
    """
    if taps < 1:
        raise ValueError(f"taps must be >= 1, got {taps}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    c = np.empty(taps + 1)
    c[0] = 1.0
    for k in range(1, taps + 1):
        c[k] = c[k - 1] * (k - alpha - 1) / k + 0.0  # no signed zeros
    return GLMask(float(alpha), c)


def _causal_filter(x: np.ndarray, coeffs: np.ndarray, axis: int) -> np.ndarray:
    """``y[i] = sum_k c_k x[i - k]`` along ``axis`` with symmetric extension."""
    taps = len(coeffs) - 1
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    pad = [(0, 0)] * (x.ndim - 1) + [(taps, 0)]
    padded = np.pad(x, pad, mode="symmetric")
    out = np.zeros_like(x)
    for k, c in enumerate(coeffs):
        if c != 0.0:
            out += c * padded[..., taps - k : taps - k + n]
    return np.moveaxis(out, -1, axis)


def _field(x: np.ndarray, alpha: float, taps: int) -> GradientField:
    mask = gl_coefficients(alpha, taps)
    return GradientField(
        _causal_filter(x, mask.coeffs, axis=1),
        _causal_filter(x, mask.coeffs, axis=0),
    )


def frac_gradient(img, alpha: float = 0.5, taps: int = 8) -> GradientField:
    """Backward fractional differences along x (columns) and y (rows).

    With ``alpha == 1`` this is exactly the backward first difference, zero in
    the first column/row because of the symmetric extension. Axes shorter
    than the mask are handled by repeated mirroring.
    """
    x = np.asarray(img, dtype=np.float64)
    if x.ndim == 3 and x.shape[2] == 1:
        x = x[:, :, 0]
    if x.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {x.shape}")
    if taps >= max(x.shape):
        raise ValueError(f"mask of {taps} taps is longer than the {x.shape} image")
    return _field(x, alpha, taps)


def frac_boost_subband(subband, alpha: float = 0.5, gain: float = 1.0, taps: int = 8) -> np.ndarray:
    """``subband + gain * (gx + gy)`` of the fractional gradient of ``subband``.

    Unlike :func:`frac_gradient` this accepts subbands smaller than the mask,
    since the coarsest pyramid levels can shrink to a few pixels.
    """
    if gain < 0:
        raise ValueError(f"gain must be non-negative, got {gain}")
    s = np.asarray(subband, dtype=np.float64)
    if gain == 0:
        return s.copy()
    field = _field(s, alpha, taps)
    return s + gain * (field.gx + field.gy)
