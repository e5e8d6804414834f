"""Gradient-domain fusion of image variants with Neumann Poisson reconstruction."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import fft

from .errors import NumericalError, ShapeMismatchError
from .fractional import GradientField

__all__ = [
    "image_gradient",
    "divergence",
    "laplacian",
    "fuse_gradients",
    "poisson_reconstruct",
    "gradient_domain_fuse",
]

RESIDUAL_BOUND = 1e-8


def image_gradient(img) -> GradientField:
    """Forward differences; the last column of ``gx`` and last row of ``gy`` are zero."""
    x = np.asarray(img, dtype=np.float64)
    gx = np.zeros_like(x)
    gy = np.zeros_like(x)
    gx[:, :-1] = x[:, 1:] - x[:, :-1]
    gy[:-1, :] = x[1:, :] - x[:-1, :]
    return GradientField(gx, gy)


def divergence(field: GradientField) -> np.ndarray:
    """Backward-difference divergence, the negative adjoint of :func:`image_gradient`.

    The last column of ``gx`` / last row of ``gy`` lie outside the domain and
    are ignored.
    """
    gx = np.pad(field.gx[:, :-1], ((0, 0), (1, 1)))
    gy = np.pad(field.gy[:-1, :], ((1, 1), (0, 0)))
    return (gx[:, 1:] - gx[:, :-1]) + (gy[1:, :] - gy[:-1, :])


def laplacian(u: np.ndarray) -> np.ndarray:
    """5-point Laplacian with zero-flux boundaries (``divergence(image_gradient(u))``)."""
    return divergence(image_gradient(u))


def fuse_gradients(fields: Sequence[GradientField]) -> GradientField:
    """Per pixel, keep the field with the largest magnitude (first one on ties)."""
    if not fields:
        raise ValueError("need at least one gradient field")
    shape = fields[0].shape
    if any(f.shape != shape for f in fields):
        raise ShapeMismatchError(f"field shapes differ: {[f.shape for f in fields]}")
    mags = np.stack([f.gx**2 + f.gy**2 for f in fields])
    pick = np.argmax(mags, axis=0)[None]
    gx = np.take_along_axis(np.stack([f.gx for f in fields]), pick, axis=0)[0]
    gy = np.take_along_axis(np.stack([f.gy for f in fields]), pick, axis=0)[0]
    return GradientField(gx, gy)


def _eigenvalues(n: int) -> np.ndarray:
    return 4.0 * np.sin(np.pi * np.arange(n) / (2.0 * n)) ** 2


def poisson_reconstruct(field: GradientField, target_mean: float = 0.0) -> np.ndarray:
    """Least-squares integration of ``field``: solve ``lap(u) = div(field)``.

    The Neumann Laplacian is diagonal in the orthonormal DCT-II basis, so
    the solve is one forward and one inverse transform. The free constant is
    fixed by setting ``mean(u) = target_mean``.

    Raises
    ------
    NumericalError
        If the field is non-finite or the relative residual exceeds 1e-8.
    """
    if not (np.all(np.isfinite(field.gx)) and np.all(np.isfinite(field.gy))):
        raise NumericalError("gradient field contains non-finite values")
    div = divergence(field)
    h, w = div.shape
    denom = _eigenvalues(h)[:, None] + _eigenvalues(w)[None, :]
    denom[0, 0] = 1.0
    coeffs = fft.dctn(-div, type=2, norm="ortho") / denom
    coeffs[0, 0] = 0.0
    u = fft.idctn(coeffs, type=2, norm="ortho")
    u += target_mean - u.mean()

    scale = np.linalg.norm(div)
    resid = np.linalg.norm(laplacian(u) - div)
    if scale > 0 and resid > RESIDUAL_BOUND * scale or scale == 0 and resid > RESIDUAL_BOUND:
        raise NumericalError(f"Poisson residual {resid:.3g} exceeds bound (|div| = {scale:.3g})")
    if not np.all(np.isfinite(u)):
        raise NumericalError("Poisson solution is not finite")
    return u


def gradient_domain_fuse(variants: Sequence[np.ndarray], target_mean: float, clamp: bool = True) -> np.ndarray:
    """Max-magnitude gradient fusion of co-registered variants, then integration.

    ``clamp=False`` keeps signed output, which detail layers need.
    """
    fields = [image_gradient(np.asarray(v, dtype=np.float64)) for v in variants]
    u = poisson_reconstruct(fuse_gradients(fields), target_mean)
    return np.clip(u, 0.0, 1.0) if clamp else u
