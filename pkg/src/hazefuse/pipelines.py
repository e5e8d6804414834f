"""The two enhancement pipelines and their outer iteration.

``pa1_enhance``
    Two-stage fusion. Gamma variants of the luminance are split into
    diffusion base and detail layers; bases and details are fused separately
    in the gradient domain. The result is then fused with a globally
    stretched luminance by anisotropic-diffusion/KL fusion, and colour is
    restored from one of the variants.

``pa2_enhance``
    Wavelet enhancement in XYZ. The working channel is decomposed, every
    detail subband receives a fractional-gradient boost, the approximation is
    fused with its own diffused copy, and the result is synthesised, converted
    back and colour corrected.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .ad_fusion import ad_fuse, split_base_detail
from .dcp import DcpParams, dark_channel, dcp_dehaze
from .errors import ColorSpaceError, NumericalError
from .fractional import frac_boost_subband
from .gradient_fusion import gradient_domain_fuse
from .image_core import (
    ColorSpace,
    Image,
    gray_world_correct,
    luminance,
    percentile_stretch,
    rgb_to_xyz,
    xyz_to_rgb,
)
from .smoothing import DiffusionParams, NlmParams, diffuse, nlm_smooth
from .wavelet import Basis, decompose, reconstruct

__all__ = [
    "XyzMode",
    "PipelineConfig",
    "PassRecord",
    "derive_variants",
    "pa1_enhance",
    "pa2_enhance",
    "iterate",
    "run_algorithm",
    "ALGORITHMS",
]

_Y_EPS = 1e-6

ALGORITHMS = ("pa1", "pa2", "dcp")


class XyzMode(enum.Enum):
    Y_ONLY = "y_only"
    ALL = "all"


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of both pipelines.

    ``to_flat``/``from_flat`` translate to the flat key/value form used by the
    CLI config file; see ``FLAT_KEYS`` for the mapping.
    """

    scales: int = 3
    alpha: float = 0.5
    frac_gain: float = 0.1
    taps: int = 8
    gammas: tuple[float, ...] = (0.5, 1.0, 1.5)
    diffusion: DiffusionParams = field(default_factory=DiffusionParams)
    nlm: NlmParams = field(default_factory=NlmParams)
    use_nlm: bool = False
    outer_iterations: int = 1
    gray_world: bool = True
    percentile_stretch: bool = True
    stretch_lo: float = 1.0
    stretch_hi: float = 99.0
    xyz_channel_mode: XyzMode = XyzMode.Y_ONLY
    basis: Basis = Basis.HAAR
    base_rule: str = "mean"
    stage2_input: str = "global"
    chroma_source: str = "median"
    dcp: DcpParams = field(default_factory=DcpParams)

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "xyz_channel_mode", XyzMode(self.xyz_channel_mode))
        object.__setattr__(self, "basis", Basis(self.basis))
        if self.scales < 1:
            raise ValueError(f"scales must be >= 1, got {self.scales}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.frac_gain < 0:
            raise ValueError(f"frac_gain must be non-negative, got {self.frac_gain}")
        if self.taps < 1:
            raise ValueError(f"taps must be >= 1, got {self.taps}")
        if not self.gammas or any(g <= 0 for g in self.gammas):
            raise ValueError(f"gammas must be a non-empty list of positive values, got {self.gammas}")
        if self.outer_iterations < 1:
            raise ValueError(f"outer_iterations must be >= 1, got {self.outer_iterations}")
        if not 0 <= self.stretch_lo < self.stretch_hi <= 100:
            raise ValueError("need 0 <= stretch_lo < stretch_hi <= 100")
        if self.base_rule not in ("mean", "max"):
            raise ValueError(f"base_rule must be 'mean' or 'max', got {self.base_rule!r}")
        if self.stage2_input not in ("global", "original"):
            raise ValueError(f"stage2_input must be 'global' or 'original', got {self.stage2_input!r}")
        if self.chroma_source not in ("median", "original"):
            raise ValueError(f"chroma_source must be 'median' or 'original', got {self.chroma_source!r}")

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    # -- flat form ----------------------------------------------------------

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {}
        for key, (section, attr) in FLAT_KEYS.items():
            value = getattr(getattr(self, section) if section else self, attr)
            if isinstance(value, enum.Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            flat[key] = value
        return flat

    @classmethod
    def from_flat(cls, flat: dict[str, Any], base: "PipelineConfig | None" = None) -> "PipelineConfig":
        """Overlay ``flat`` onto ``base`` (defaults if omitted).

        Unknown keys raise ``KeyError``.
        """
        base = base or cls()
        unknown = sorted(set(flat) - set(FLAT_KEYS))
        if unknown:
            raise KeyError(f"unknown config keys: {', '.join(unknown)}")
        top: dict[str, Any] = {}
        nested: dict[str, dict[str, Any]] = {"diffusion": {}, "nlm": {}, "dcp": {}}
        for key, value in flat.items():
            section, attr = FLAT_KEYS[key]
            if section:
                nested[section][attr] = value
            else:
                top[attr] = value
        for section, changes in nested.items():
            if changes:
                top[section] = dataclasses.replace(getattr(base, section), **changes)
        return dataclasses.replace(base, **top)


# flat key -> (nested section or "", attribute)
FLAT_KEYS: dict[str, tuple[str, str]] = {
    "scales": ("", "scales"),
    "alpha": ("", "alpha"),
    "frac_gain": ("", "frac_gain"),
    "taps": ("", "taps"),
    "gammas": ("", "gammas"),
    "kappa": ("diffusion", "kappa"),
    "lambda": ("diffusion", "lam"),
    "diffusion_iterations": ("diffusion", "iterations"),
    "conductance": ("diffusion", "conductance"),
    "nlm": ("", "use_nlm"),
    "nlm_patch_radius": ("nlm", "patch_radius"),
    "nlm_search_radius": ("nlm", "search_radius"),
    "nlm_h": ("nlm", "h"),
    "nlm_sigma": ("nlm", "sigma"),
    "outer_iterations": ("", "outer_iterations"),
    "gray_world": ("", "gray_world"),
    "percentile_stretch": ("", "percentile_stretch"),
    "stretch_lo": ("", "stretch_lo"),
    "stretch_hi": ("", "stretch_hi"),
    "xyz_channel_mode": ("", "xyz_channel_mode"),
    "basis": ("", "basis"),
    "base_rule": ("", "base_rule"),
    "stage2_input": ("", "stage2_input"),
    "chroma_source": ("", "chroma_source"),
    "dcp_patch": ("dcp", "patch"),
    "dcp_omega": ("dcp", "omega"),
    "dcp_t_floor": ("dcp", "t_floor"),
    "dcp_airlight_fraction": ("dcp", "airlight_fraction"),
    "dcp_guided_radius": ("dcp", "guided_radius"),
    "dcp_guided_eps": ("dcp", "guided_eps"),
}


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _luma(img: Image) -> np.ndarray:
    return img.plane(0).copy() if img.channels == 1 else luminance(img).plane(0)


def _with_luma(source: Image, new_luma: np.ndarray) -> Image:
    """Shift ``source`` so its luminance becomes ``new_luma``, keeping colour differences."""
    if source.channels == 1:
        return source.with_data(np.clip(new_luma, 0.0, 1.0))
    shift = new_luma - _luma(source)
    return source.with_data(np.clip(source.data + shift[:, :, None], 0.0, 1.0))


def derive_variants(img: Image, gammas) -> list[Image]:
    """Power-law variants ``clip(img ** g)``; a ``g = 1`` variant is appended if absent."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("gammas must not be empty")
    if 1.0 not in gammas:
        gammas.append(1.0)
    base = np.clip(img.data, 0.0, 1.0)
    return [img.with_data(np.clip(base**g, 0.0, 1.0)) for g in gammas]


def _global_variant(img: Image, cfg: PipelineConfig) -> Image:
    if cfg.percentile_stretch:
        return percentile_stretch(img, cfg.stretch_lo, cfg.stretch_hi)
    return img


# ---------------------------------------------------------------------------
# PA1
# ---------------------------------------------------------------------------


def pa1_enhance(img: Image, cfg: PipelineConfig = PipelineConfig()) -> Image:
    variants = derive_variants(img, cfg.gammas)
    lumas = [_luma(v) for v in variants]
    original = _luma(img)

    # Stage 1: gradient-domain fusion of base and detail layers, separately.
    splits = [split_base_detail(y, cfg.diffusion) for y in lumas]
    base = gradient_domain_fuse([b for b, _ in splits], target_mean=float(original.mean()))
    detail = gradient_domain_fuse([d for _, d in splits], target_mean=0.0, clamp=False)
    stage1 = np.clip(base + detail, 0.0, 1.0)

    # Stage 2: AD/KL fusion with a globally enhanced luminance.
    other = _luma(_global_variant(img, cfg)) if cfg.stage2_input == "global" else original
    fused = ad_fuse([stage1, other], cfg.diffusion, cfg.base_rule)

    if cfg.chroma_source == "median":
        order = np.argsort([y.mean() for y in lumas], kind="stable")
        source = variants[int(order[(len(order) - 1) // 2])]
    else:
        source = img
    out = _with_luma(source, fused)
    if cfg.use_nlm:
        out = out.with_data(nlm_smooth(out.data, cfg.nlm))
    return out.clamped()


# ---------------------------------------------------------------------------
# PA2
# ---------------------------------------------------------------------------


def _wavelet_enhance(plane: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    pyr = decompose(plane, cfg.scales, cfg.basis)
    pyr = pyr.map_details(lambda band, level, name: frac_boost_subband(band, cfg.alpha, cfg.frac_gain, cfg.taps))
    # Each orthonormal 2-D level multiplies a constant by 2; undo that so the
    # approximation is on the image's intensity scale while it is fused.
    dc_gain = 2.0**cfg.scales
    ll = pyr.approx / dc_gain
    fused = ad_fuse([ll, diffuse(ll, cfg.diffusion)], cfg.diffusion, cfg.base_rule, clamp=False)
    pyr.approx = fused * dc_gain
    return reconstruct(pyr)


def _pa2_core(img: Image, cfg: PipelineConfig) -> Image:
    if img.channels == 1:
        out = img.with_data(_wavelet_enhance(img.plane(0), cfg))
    else:
        if img.space is not ColorSpace.SRGB:
            raise ColorSpaceError(f"pa2 expects an sRGB image, got {img.space.name}")
        xyz = rgb_to_xyz(img).data.copy()
        if cfg.xyz_channel_mode is XyzMode.ALL:
            for c in range(3):
                xyz[:, :, c] = _wavelet_enhance(xyz[:, :, c], cfg)
        else:
            y_old = xyz[:, :, 1]
            y_new = np.maximum(_wavelet_enhance(y_old, cfg), 0.0)
            # Scale X and Z with Y so every pixel keeps its chromaticity.
            ratio = (y_new + _Y_EPS) / (y_old + _Y_EPS)
            xyz *= ratio[:, :, None]
        out = xyz_to_rgb(Image(xyz, ColorSpace.XYZ))
        if cfg.gray_world:
            out = gray_world_correct(out)
    if cfg.percentile_stretch:
        out = percentile_stretch(out, cfg.stretch_lo, cfg.stretch_hi)
    return out.clamped()


def pa2_enhance(img: Image, cfg: PipelineConfig = PipelineConfig()) -> Image:
    out = _pa2_core(img, cfg)
    if cfg.use_nlm:
        out = out.with_data(nlm_smooth(out.data, cfg.nlm)).clamped()
    return out


# ---------------------------------------------------------------------------
# Outer iteration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PassRecord:
    index: int
    rms_change: float
    dark_channel_mean: float
    renormalized: bool


def _single_pass(img: Image, cfg: PipelineConfig, algo: str) -> Image:
    if algo == "pa1":
        return pa1_enhance(img, cfg.replace(use_nlm=False))
    if algo == "pa2":
        return _pa2_core(img, cfg)
    if algo == "dcp":
        return dcp_dehaze(img, cfg.dcp)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")


def iterate(
    img: Image,
    cfg: PipelineConfig = PipelineConfig(),
    algo: str = "pa2",
    history: list | None = None,
) -> Image:
    """Run ``algo`` up to ``cfg.outer_iterations`` times.

    Between passes the working range is stretched back to ``[0, 1]`` if it
    has collapsed below 0.5. Iteration stops once a pass changes the image by
    less than 1e-4 RMS. Optional NLM smoothing runs once, after the last pass.
    If ``history`` is a list, one :class:`PassRecord` per pass is appended.
    """
    current = img
    for k in range(cfg.outer_iterations):
        nxt = _single_pass(current, cfg, algo)
        change = float(np.sqrt(np.mean((nxt.data - current.data) ** 2)))
        renorm = False
        if k + 1 < cfg.outer_iterations and change >= 1e-4:
            lo, hi = float(nxt.data.min()), float(nxt.data.max())
            if 0 < hi - lo < 0.5:
                nxt = nxt.with_data((nxt.data - lo) / (hi - lo))
                renorm = True
        if not np.all(np.isfinite(nxt.data)):
            raise NumericalError(f"pass {k + 1} produced non-finite samples")
        if history is not None:
            dcm = float(dark_channel(nxt, cfg.dcp.patch).mean())
            history.append(PassRecord(k + 1, change, dcm, renorm))
        current = nxt
        if change < 1e-4:
            break
    if cfg.use_nlm:
        current = current.with_data(nlm_smooth(current.data, cfg.nlm)).clamped()
    return current


def run_algorithm(img: Image, algo: str, cfg: PipelineConfig = PipelineConfig(), history=None) -> Image:
    """Entry point used by the CLI: any algorithm, with outer iteration."""
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    return iterate(img, cfg, algo, history)

