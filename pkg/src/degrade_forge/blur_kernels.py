"""Isotropic, anisotropic, and sub-pixel-shifted Gaussian blur kernels.

Kernels are evaluated point-wise on the integer offset grid and normalized
to sum 1. Width sigma is the per-axis standard deviation; the anisotropic
covariance is R(theta) diag(sigma_major^2, sigma_minor^2) R(theta)^T with
theta measured from the +x axis.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

KERNEL_SIZES = (7, 9, 11, 13, 15, 17, 19, 21)
ISO_SIGMA_RANGE = {2: (0.1, 2.4), 4: (0.1, 2.8)}
ANISO_AXIS_RANGE = {2: (0.5, 6.0), 4: (0.5, 8.0)}
SHIFTED_KERNEL_SIZE = 21


@dataclass(frozen=True)
class BlurSpec:
    """Sampled parameters for one Gaussian blur application."""

    kind: str  # "iso" | "aniso"
    size: int
    sigma: Optional[float] = None
    sigma_major: Optional[float] = None
    sigma_minor: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("iso", "aniso"):
            raise ValueError(f"unknown blur kind {self.kind!r}")
        if self.size % 2 == 0 or self.size < 1:
            raise ValueError(f"kernel size must be odd positive, got {self.size}")
        if self.kind == "iso":
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("iso blur needs sigma > 0")
        else:
            if (
                self.sigma_major is None
                or self.sigma_minor is None
                or self.sigma_major <= 0
                or self.sigma_minor <= 0
            ):
                raise ValueError("aniso blur needs positive axis sigmas")
            if self.theta is None:
                raise ValueError("aniso blur needs theta")

    def to_dict(self) -> dict:
        if self.kind == "iso":
            return {"kind": "iso", "size": self.size, "sigma": self.sigma}
        return {
            "kind": "aniso",
            "size": self.size,
            "sigma_major": self.sigma_major,
            "sigma_minor": self.sigma_minor,
            "theta": self.theta,
        }

    @staticmethod
    def from_dict(d: dict) -> "BlurSpec":
        return BlurSpec(**d)


def _offsets(size: int) -> np.ndarray:
    return np.arange(size, dtype=np.float64) - size // 2


def gaussian_1d(size: int, sigma: float, shift: float = 0.0) -> np.ndarray:
    """Normalized 1D Gaussian sampled at integer offsets.

    A nonzero `shift` moves the profile by linear interpolation of the
    centered samples (taps falling outside the support become 0), which
    preserves the first moment exactly before renormalization.
    """
    if size % 2 == 0 or size < 1:
        raise ValueError(f"size must be odd positive, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    o = _offsets(size)
    g = np.exp(-(o * o) / (2.0 * sigma * sigma))
    if shift != 0.0:
        g = np.interp(o - shift, o, g, left=0.0, right=0.0)
    return g / g.sum()


def iso_gaussian(size: int, sigma: float) -> np.ndarray:
    """Isotropic Gaussian kernel; sigma 0.1 is numerically the delta kernel."""
    g = gaussian_1d(size, sigma)
    k = np.outer(g, g)
    return k / k.sum()


def aniso_gaussian(
    size: int, sigma_major: float, sigma_minor: float, theta: float
) -> np.ndarray:
    """Rotated elliptical Gaussian kernel."""
    if size % 2 == 0 or size < 1:
        raise ValueError(f"size must be odd positive, got {size}")
    if sigma_major <= 0 or sigma_minor <= 0:
        raise ValueError("axis sigmas must be > 0")
    c, s = math.cos(theta), math.sin(theta)
    inv_major = 1.0 / (sigma_major * sigma_major)
    inv_minor = 1.0 / (sigma_minor * sigma_minor)
    # Inverse covariance R diag(1/sM^2, 1/sm^2) R^T, written out.
    ia = c * c * inv_major + s * s * inv_minor
    ib = c * s * (inv_major - inv_minor)
    ic = s * s * inv_major + c * c * inv_minor
    o = _offsets(size)
    dy, dx = np.meshgrid(o, o, indexing="ij")
    q = ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy
    k = np.exp(-0.5 * q)
    return k / k.sum()


def shifted_iso_gaussian(size: int, sigma: float, shift) -> np.ndarray:
    """Isotropic Gaussian displaced by (dy, dx) pixels via linear grid
    interpolation and renormalized; the output centroid lands at (dy, dx)
    up to truncation of the support tail."""
    dy, dx = float(shift[0]), float(shift[1])
    limit = size / 2.0 - 1.0
    if abs(dy) >= limit or abs(dx) >= limit:
        raise ValueError(f"shift {(dy, dx)} too large for size {size}")
    gy = gaussian_1d(size, sigma, shift=dy)
    gx = gaussian_1d(size, sigma, shift=dx)
    k = np.outer(gy, gx)
    return k / k.sum()


def kernel_from_spec(spec: BlurSpec) -> np.ndarray:
    if spec.kind == "iso":
        return iso_gaussian(spec.size, spec.sigma)
    return aniso_gaussian(spec.size, spec.sigma_major, spec.sigma_minor, spec.theta)


def sample_blur_spec(scale: int, kind: str, rng: np.random.Generator) -> BlurSpec:
    """Draw blur parameters for the given net scale factor.

    Size is uniform over {7, 9, ..., 21}. Iso sigma ~ U[0.1, 2.4] (x2) or
    U[0.1, 2.8] (x4); aniso theta ~ U[0, pi] with each axis sigma
    ~ U[0.5, 6] (x2) or U[0.5, 8] (x4). Draw order is frozen: size, then
    the remaining parameters in the listed order.
    """
    if scale not in ISO_SIGMA_RANGE:
        raise ValueError(f"scale must be 2 or 4, got {scale}")
    size = KERNEL_SIZES[rng.integers(0, len(KERNEL_SIZES))]
    if kind == "iso":
        lo, hi = ISO_SIGMA_RANGE[scale]
        return BlurSpec(kind="iso", size=int(size), sigma=float(rng.uniform(lo, hi)))
    if kind == "aniso":
        lo, hi = ANISO_AXIS_RANGE[scale]
        theta = float(rng.uniform(0.0, math.pi))
        major = float(rng.uniform(lo, hi))
        minor = float(rng.uniform(lo, hi))
        return BlurSpec(
            kind="aniso",
            size=int(size),
            sigma_major=major,
            sigma_minor=minor,
            theta=theta,
        )
    raise ValueError(f"unknown blur kind {kind!r}")
