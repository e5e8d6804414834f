"""Anisotropic-diffusion fusion with Karhunen-Loeve (PCA) detail weights.

Each input is split into a diffused base layer and its residual detail. Bases
are averaged; details are mixed with weights taken from the dominant
eigenvector of the detail covariance, which favours the most energetic layer.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ShapeMismatchError
from .smoothing import DiffusionParams, diffuse

__all__ = [
    "split_base_detail",
    "jacobi_eigh",
    "kl_weights",
    "ad_fuse",
]


def split_base_detail(img, p: DiffusionParams) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(img, dtype=np.float64)
    base = diffuse(x, p)
    return base, x - base


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns, in
    the diagonal order the rotations leave them (not sorted).
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    return np.diag(a).copy(), v


def kl_weights(details: Sequence[np.ndarray], rtol: float = 1e-12) -> np.ndarray:
    """Normalised ``|v|`` of the covariance's dominant eigenvector.

    Equal top eigenvalues (within ``rtol``) are resolved toward the lowest
    diagonal index. An all-constant stack has no dominant direction and gets
    uniform weights.
    """
    n = len(details)
    if n < 1:
        raise ValueError("need at least one layer")
    cols = np.stack([np.asarray(d, dtype=np.float64).ravel() for d in details], axis=1)
    if n == 1:
        return np.ones(1)
    centred = cols - cols.mean(axis=0)
    cov = centred.T @ centred / max(cols.shape[0] - 1, 1)
    if np.abs(cov).max() <= np.finfo(float).tiny:
        return np.full(n, 1.0 / n)
    vals, vecs = jacobi_eigh(cov)
    top = vals.max()
    idx = int(np.flatnonzero(vals >= top - rtol * abs(top))[0])
    mag = np.abs(vecs[:, idx])
    total = mag.sum()
    if total == 0:
        return np.full(n, 1.0 / n)
    return mag / total


def ad_fuse(
    inputs: Sequence[np.ndarray],
    p: DiffusionParams,
    base_rule: str = "mean",
    clamp: bool = True,
) -> np.ndarray:
    """Fuse co-registered single-channel layers.

    Parameters
    ----------
    inputs : sequence of 2-D arrays
        Layers to fuse; all must have the same shape.
    p : DiffusionParams
        Settings for the base-layer diffusion.
    base_rule : {"mean", "max"}
        How to combine base layers. ``"max"`` takes the pixelwise maximum.
    clamp : bool
        Clip the result to ``[0, 1]``. Callers fusing unnormalised data
        (e.g. wavelet approximations) switch this off.
    """
    layers = [np.asarray(x, dtype=np.float64) for x in inputs]
    if not layers:
        raise ValueError("need at least one input layer")
    shape = layers[0].shape
    if any(x.shape != shape for x in layers):
        raise ShapeMismatchError(f"layer shapes differ: {[x.shape for x in layers]}")

    splits = [split_base_detail(x, p) for x in layers]
    bases = np.stack([b for b, _ in splits])
    details = [d for _, d in splits]

    if base_rule == "mean":
        fused_base = bases.mean(axis=0)
    elif base_rule == "max":
        fused_base = bases.max(axis=0)
    else:
        raise ValueError(f"unknown base rule {base_rule!r}")

    if len(layers) == 1:
        fused_detail = details[0]
    else:
        weights = kl_weights(details)
        fused_detail = np.tensordot(weights, np.stack(details), axes=1)
    out = fused_base + fused_detail
    return np.clip(out, 0.0, 1.0) if clamp else out
