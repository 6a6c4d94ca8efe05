"""The individual degradation operators: blur application, the four
downsamplers, cross-channel Gaussian noise, and their samplers.

Clamping policy: noise operators clamp their output; blur clamps (its output
is a convex combination of inputs, so this only scrubs float dust); resizes
stay linear and are clamped at pipeline emission.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blur_kernels import (
    SHIFTED_KERNEL_SIZE,
    BlurSpec,
    gaussian_1d,
    kernel_from_spec,
)
from .image import as_image, clamp01, filter2d_reflect
from .jpeg import QUALITY_RANGE, JpegSpec
from .resize import resize

DOWNSAMPLE_METHODS = ("nearest", "bilinear", "bicubic", "down_up")
GAUSSIAN_MODES = ("general", "channel_independent", "gray")
GAUSSIAN_MODE_PROBS = (0.2, 0.4, 0.4)
GAUSSIAN_SIGMA_LEVELS = 25  # sigma in {1, ..., 25} / 255
JPEG_INNER_PROB = 0.75


def nearest_preblur_range(scale: int) -> tuple:
    return (0.1, 0.6 * scale)


@dataclass(frozen=True)
class DownSpec:
    """One sampled downsampling operation with net factor `scale`."""

    method: str
    scale: int
    pre_blur_sigma: Optional[float] = None  # nearest only
    a: Optional[float] = None  # down_up only, in [1/2, scale]
    stage1_method: Optional[str] = None  # down_up: scale by a/s
    stage2_method: Optional[str] = None  # down_up: scale by 1/a

    def __post_init__(self):
        if self.method not in DOWNSAMPLE_METHODS + ("stride",):
            raise ValueError(f"unknown downsample method {self.method!r}")
        if self.scale <= 1:
            raise ValueError(f"scale must exceed 1, got {self.scale}")
        if self.method == "nearest":
            if self.pre_blur_sigma is None or not (
                0.1 <= self.pre_blur_sigma <= 0.6 * self.scale
            ):
                raise ValueError(
                    f"nearest pre-blur sigma {self.pre_blur_sigma} outside "
                    f"[0.1, {0.6 * self.scale}]"
                )
        if self.method == "down_up":
            if self.a is None or not (0.5 <= self.a <= self.scale):
                raise ValueError(f"down_up a={self.a} outside [1/2, {self.scale}]")
            if self.stage1_method not in ("bilinear", "bicubic"):
                raise ValueError(f"bad stage1 method {self.stage1_method!r}")
            if self.stage2_method not in ("bilinear", "bicubic"):
                raise ValueError(f"bad stage2 method {self.stage2_method!r}")

    def to_dict(self) -> dict:
        d = {"method": self.method, "scale": self.scale}
        if self.pre_blur_sigma is not None:
            d["pre_blur_sigma"] = self.pre_blur_sigma
        if self.a is not None:
            d.update(
                a=self.a,
                stage1_method=self.stage1_method,
                stage2_method=self.stage2_method,
            )
        return d

    @staticmethod
    def from_dict(d: dict) -> "DownSpec":
        return DownSpec(**d)


@dataclass(frozen=True)
class GaussianNoiseSpec:
    """Zero-mean 3D Gaussian noise with cross-channel covariance.

    channel_independent: cov = sigma^2 I; gray: cov = sigma^2 * ones(3, 3)
    (one shared draw per pixel); general: an explicit PSD covariance whose
    mean per-channel variance equals sigma^2.
    """

    mode: str
    sigma: float
    covariance: Optional[tuple] = None  # 3x3 nested tuple, general mode

    def __post_init__(self):
        if self.mode not in GAUSSIAN_MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if not (0.0 <= self.sigma <= 1.0):
            raise ValueError(f"sigma {self.sigma} outside [0, 1]")
        if self.mode == "general":
            cov = np.asarray(self.covariance, dtype=np.float64)
            if cov.shape != (3, 3):
                raise ValueError("general mode needs a 3x3 covariance")

    def covariance_matrix(self) -> np.ndarray:
        if self.mode == "channel_independent":
            return self.sigma**2 * np.eye(3)
        if self.mode == "gray":
            return self.sigma**2 * np.ones((3, 3))
        return np.asarray(self.covariance, dtype=np.float64)

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "sigma": self.sigma}
        if self.covariance is not None:
            d["covariance"] = [list(row) for row in self.covariance]
        return d

    @staticmethod
    def from_dict(d: dict) -> "GaussianNoiseSpec":
        cov = d.get("covariance")
        if cov is not None:
            cov = tuple(tuple(float(v) for v in row) for row in cov)
        return GaussianNoiseSpec(mode=d["mode"], sigma=d["sigma"], covariance=cov)


def apply_blur(img: np.ndarray, spec: BlurSpec) -> np.ndarray:
    """Convolve with the synthesized Gaussian kernel, reflect-padded, clamped.

    Isotropic kernels are applied separably (two 1D passes), which is exact
    for the outer-product construction; anisotropic kernels use the full 2D
    stencil.
    """
    img = as_image(img)
    if spec.kind == "iso":
        g = gaussian_1d(spec.size, spec.sigma)
        out = filter2d_reflect(img, g[None, :])
        out = filter2d_reflect(out, g[:, None])
    else:
        out = filter2d_reflect(img, kernel_from_spec(spec))
    return clamp01(out)


def stride_subsample(img: np.ndarray, scale: int) -> np.ndarray:
    """Plain every-s-th-pixel decimation (the uncorrected grid)."""
    img = as_image(img)
    h, w = img.shape[:2]
    if h % scale or w % scale:
        raise ValueError(f"{h}x{w} not divisible by stride {scale}")
    return np.ascontiguousarray(img[::scale, ::scale])


def shift_corrected_nearest(img: np.ndarray, scale: int, pre_blur_sigma: float) -> np.ndarray:
    """Nearest downsampling with the grid-offset correction: pre-convolve with
    a 21x21 Gaussian displaced by 0.5*(s-1) pixels, then decimate."""
    d = 0.5 * (scale - 1)
    gy = gaussian_1d(SHIFTED_KERNEL_SIZE, pre_blur_sigma, shift=d)
    blurred = filter2d_reflect(img, gy[None, :])
    blurred = filter2d_reflect(blurred, gy[:, None])
    return stride_subsample(blurred, scale)


def down_up_stage_sizes(h: int, w: int, spec: DownSpec) -> tuple:
    """((mid_h, mid_w), (out_h, out_w)) for the two down_up stages."""
    ratio = spec.a / spec.scale
    mid = (max(1, int(np.floor(h * ratio + 0.5))), max(1, int(np.floor(w * ratio + 0.5))))
    return mid, (h // spec.scale, w // spec.scale)


def downsample(img: np.ndarray, spec: DownSpec) -> np.ndarray:
    """Apply one of the four downsamplers; output is (H//s, W//s)."""
    img = as_image(img)
    h, w = img.shape[:2]
    s = spec.scale
    if h // s < 1 or w // s < 1:
        raise ValueError(f"{h}x{w} too small for scale {s}")
    if spec.method == "nearest":
        return shift_corrected_nearest(img, s, spec.pre_blur_sigma)
    if spec.method in ("bilinear", "bicubic"):
        return resize(img, h // s, w // s, spec.method, antialias=True)
    if spec.method == "stride":
        return stride_subsample(img, s)
    mid, out = down_up_stage_sizes(h, w, spec)
    x = resize(img, mid[0], mid[1], spec.stage1_method, antialias=True)
    return resize(x, out[0], out[1], spec.stage2_method, antialias=True)


def psd_factor(cov: np.ndarray) -> np.ndarray:
    """Deterministic L with L L^T = cov for a symmetric PSD matrix."""
    cov = np.asarray(cov, dtype=np.float64)
    sym = 0.5 * (cov + cov.T)
    if not np.allclose(cov, cov.T, atol=1e-10):
        raise ValueError("covariance must be symmetric")
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -1e-10:
        raise ValueError(f"covariance not PSD (min eigenvalue {vals.min()})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def add_gaussian_noise(
    img: np.ndarray, spec: GaussianNoiseSpec, rng: np.random.Generator
) -> np.ndarray:
    """Add per-pixel N(0, cov) noise and clamp to [0, 1]."""
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("cross-channel noise requires a 3-channel image")
    h, w = img.shape[:2]
    if spec.mode == "gray":
        z = rng.standard_normal((h, w, 1))
        noise = spec.sigma * z  # broadcast: identical residual per channel
    elif spec.mode == "channel_independent":
        noise = spec.sigma * rng.standard_normal((h, w, 3))
    else:
        factor = psd_factor(spec.covariance_matrix())
        noise = rng.standard_normal((h, w, 3)) @ factor.T
    return clamp01(img + noise)


def sample_general_covariance(sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Random PSD covariance via a Gram matrix, trace-normalized so the
    mean per-channel variance is sigma^2."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    m = rng.standard_normal((3, 3))
    gram = m.T @ m
    return 3.0 * sigma**2 * gram / np.trace(gram)


def sample_gaussian_noise_spec(
    rng: np.random.Generator,
    mode_probs: tuple = GAUSSIAN_MODE_PROBS,
    sigma_levels: int = GAUSSIAN_SIGMA_LEVELS,
) -> GaussianNoiseSpec:
    """Mode with probabilities (general, channel_independent, gray), sigma
    uniform over {1, ..., sigma_levels}/255. Draw order frozen: mode, level,
    then covariance entries when in general mode."""
    u = rng.random()
    if u < mode_probs[0]:
        mode = "general"
    elif u < mode_probs[0] + mode_probs[1]:
        mode = "channel_independent"
    else:
        mode = "gray"
    sigma = float(rng.integers(1, sigma_levels + 1)) / 255.0
    cov = None
    if mode == "general":
        mat = sample_general_covariance(sigma, rng)
        cov = tuple(tuple(float(v) for v in row) for row in mat)
    return GaussianNoiseSpec(mode=mode, sigma=sigma, covariance=cov)


def sample_jpeg_spec(
    rng: np.random.Generator, quality_range: tuple = QUALITY_RANGE
) -> JpegSpec:
    return JpegSpec(quality=int(rng.integers(quality_range[0], quality_range[1] + 1)))


def sample_noise_specs(rng: np.random.Generator):
    """(GaussianNoiseSpec, inner JpegSpec or None): Gaussian noise is always
    produced; the inner JPEG step fires with probability 0.75."""
    gauss = sample_gaussian_noise_spec(rng)
    jpeg = None
    if rng.random() < JPEG_INNER_PROB:
        jpeg = sample_jpeg_spec(rng)
    return gauss, jpeg
