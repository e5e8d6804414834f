"""Separable multilevel 2-D discrete wavelet transform.

Two orthonormal bases are available, Haar and Daubechies-2. Signals of odd
length are extended by one half-sample symmetric sample (the last sample
repeated) so that every subband has ``ceil(n / 2)`` samples along each axis;
the synthesis step crops the extension away again. Haar never reaches past the
extended signal. DB2's four taps wrap around the (even) extended signal, which
keeps the transform orthogonal and non-expansive.

Subband naming: ``LH`` is low-pass along rows and high-pass along columns
(horizontal edges), ``HL`` the converse, ``HH`` high-pass in both.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Basis",
    "WaveletPyramid",
    "dwt2_level",
    "idwt2_level",
    "decompose",
    "reconstruct",
    "max_levels",
]


class Basis(enum.Enum):
    HAAR = "haar"
    DB2 = "db2"


_S2 = np.sqrt(2.0)
_S3 = np.sqrt(3.0)
_LOWPASS = {
    Basis.HAAR: np.array([1.0, 1.0]) / _S2,
    Basis.DB2: np.array([1 - _S3, 3 - _S3, 3 + _S3, 1 + _S3]) / (4 * _S2),
}


def _filters(basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    lo = _LOWPASS[Basis(basis)]
    taps = len(lo)
    hi = np.array([(-1) ** (k + 1) * lo[taps - 1 - k] for k in range(taps)])
    return lo, hi


def _tap_indices(n: int, taps: int) -> list[np.ndarray]:
    """For tap ``k``, the input index feeding output ``i`` is ``(2i + taps/2 - k) mod n``."""
    base = 2 * np.arange(n // 2) + taps // 2
    return [(base - k) % n for k in range(taps)]


def _analysis_last_axis(x: np.ndarray, basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    if x.shape[-1] % 2:
        x = np.concatenate([x, x[..., -1:]], axis=-1)
    n = x.shape[-1]
    lo, hi = _filters(basis)
    approx = np.zeros(x.shape[:-1] + (n // 2,))
    detail = np.zeros_like(approx)
    for k, idx in enumerate(_tap_indices(n, len(lo))):
        taken = x[..., idx]
        approx += lo[k] * taken
        detail += hi[k] * taken
    return approx, detail


def _synthesis_last_axis(approx: np.ndarray, detail: np.ndarray, basis: Basis, n_out: int) -> np.ndarray:
    n = 2 * approx.shape[-1]
    lo, hi = _filters(basis)
    out = np.zeros(approx.shape[:-1] + (n,))
    for k, idx in enumerate(_tap_indices(n, len(lo))):
        out[..., idx] += lo[k] * approx + hi[k] * detail
    return out[..., :n_out]


def _as_plane(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {arr.shape}")
    return arr


def dwt2_level(img, basis: Basis = Basis.HAAR):
    """One analysis level: rows first, then columns.

    Returns ``(LL, LH, HL, HH)`` each of shape ``(ceil(H/2), ceil(W/2))``.
    """
    x = _as_plane(img)
    if x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError(f"image must be at least 2x2, got {x.shape}")
    row_lo, row_hi = _analysis_last_axis(x, basis)
    ll, lh = _analysis_last_axis(row_lo.T, basis)
    hl, hh = _analysis_last_axis(row_hi.T, basis)
    return ll.T, lh.T, hl.T, hh.T


def idwt2_level(ll, lh, hl, hh, basis: Basis = Basis.HAAR, target_shape=None) -> np.ndarray:
    """Inverse of :func:`dwt2_level`; ``target_shape`` restores odd sizes."""
    ll, lh, hl, hh = (np.asarray(b, dtype=np.float64) for b in (ll, lh, hl, hh))
    if not (ll.shape == lh.shape == hl.shape == hh.shape) or ll.ndim != 2:
        raise ValueError("subbands must be 2-D arrays of identical shape")
    if target_shape is None:
        target_shape = (2 * ll.shape[0], 2 * ll.shape[1])
    h, w = target_shape
    if (h + 1) // 2 != ll.shape[0] or (w + 1) // 2 != ll.shape[1]:
        raise ValueError(f"subband shape {ll.shape} inconsistent with target {target_shape}")
    row_lo = _synthesis_last_axis(ll.T, lh.T, basis, h).T
    row_hi = _synthesis_last_axis(hl.T, hh.T, basis, h).T
    return _synthesis_last_axis(row_lo, row_hi, basis, w)


@dataclass
class WaveletPyramid:
    """``levels``-deep decomposition; ``details[0]`` is the finest level."""

    approx: np.ndarray
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    basis: Basis = Basis.HAAR
    shapes: list[tuple[int, int]] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.details)

    def map_details(self, fn) -> "WaveletPyramid":
        """Apply ``fn(subband, level, name)`` to every detail subband."""
        details = [
            tuple(fn(band, level, name) for band, name in zip(triple, ("LH", "HL", "HH")))
            for level, triple in enumerate(self.details, start=1)
        ]
        return WaveletPyramid(self.approx.copy(), details, self.basis, list(self.shapes))

    def scaled(self, factor: float) -> "WaveletPyramid":
        return WaveletPyramid(
            self.approx * factor,
            [tuple(b * factor for b in t) for t in self.details],
            self.basis,
            list(self.shapes),
        )


def max_levels(shape) -> int:
    """Largest J with ``min(H, W) / 2**J >= 1``."""
    m = min(shape[:2])
    return int(np.floor(np.log2(m))) if m >= 2 else 0


def decompose(img, levels: int = 3, basis: Basis = Basis.HAAR) -> WaveletPyramid:
    x = _as_plane(img)
    basis = Basis(basis)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if min(x.shape) < 2**levels:
        raise ValueError(
            f"{levels} levels need min(H, W) >= {2 ** levels}, image is {x.shape[0]}x{x.shape[1]}"
        )
    details = []
    shapes = []
    current = x
    for _ in range(levels):
        shapes.append(current.shape)
        ll, lh, hl, hh = dwt2_level(current, basis)
        details.append((lh, hl, hh))
        current = ll
    return WaveletPyramid(current, details, basis, shapes)


def reconstruct(pyr: WaveletPyramid) -> np.ndarray:
    if len(pyr.shapes) != pyr.levels:
        raise ValueError("pyramid shapes do not match its number of levels")
    current = np.asarray(pyr.approx, dtype=np.float64)
    for (lh, hl, hh), shape in zip(reversed(pyr.details), reversed(pyr.shapes)):
        current = idwt2_level(current, lh, hl, hh, pyr.basis, shape)
    return current
