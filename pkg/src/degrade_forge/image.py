"""Core image container conventions, padded filtering, and luma utilities.

An image is a float64 ndarray of shape (H, W, C) with C in {1, 3} and values
nominally in [0, 1]. A 2D filter kernel is a float64 ndarray with odd sides,
nonnegative weights summing to 1.
"""

import numpy as np

from .backend import correlate2d

KERNEL_SUM_TOL = 1e-8

# BT.601 studio-swing luma coefficients on unit-range RGB.
_Y_COEF = np.array([65.481, 128.553, 24.966]) / 255.0
_Y_OFFSET = 16.0 / 255.0

LAPLACIAN_STENCIL = np.array(
    [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]
)


def as_image(arr) -> np.ndarray:
    """Coerce to a valid (H, W, C) float64 image, validating the invariants."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W, 1|3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"empty image: shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains NaN or Inf samples")
    return np.ascontiguousarray(img)


def clamp01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def validate_kernel(kernel: np.ndarray) -> np.ndarray:
    """Check the 2D-kernel invariants: odd sides, nonnegative, sum 1."""
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got shape {k.shape}")
    if np.any(k < 0):
        raise ValueError("kernel has negative weights")
    if abs(k.sum() - 1.0) > KERNEL_SUM_TOL:
        raise ValueError(f"kernel weights sum to {k.sum()!r}, expected 1")
    return np.ascontiguousarray(k)


def filter2d_reflect(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Cross-correlate each channel with `kernel` under reflect padding.

    Correlation convention (no kernel flip), so a kernel whose centroid sits
    at offset (dy, dx) shifts image content by (+dy, +dx). Reflect padding
    mirrors without repeating the edge sample, which requires the kernel
    radius to fit: side <= 2 * min(H, W) - 1.

    Linear, unclamped: output range can carry float dust outside [0, 1].
    """
    img = as_image(img)
    k = np.ascontiguousarray(np.asarray(kernel, dtype=np.float64))
    kh, kw = k.shape
    h, w = img.shape[:2]
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got {k.shape}")
    if kh > 2 * min(h, w) - 1 or kw > 2 * min(h, w) - 1:
        raise ValueError(
            f"kernel {k.shape} too large to reflect-pad a {h}x{w} image"
        )
    ph, pw = kh // 2, kw // 2
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        padded = np.pad(img[:, :, c], ((ph, ph), (pw, pw)), mode="reflect")
        out[:, :, c] = correlate2d(np.ascontiguousarray(padded), kh, kw, k)
    return out


def rgb_to_luma(img: np.ndarray) -> np.ndarray:
    """BT.601 studio-swing luma: Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255."""
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("luma conversion requires a 3-channel image")
    y = img @ _Y_COEF + _Y_OFFSET
    return y[:, :, None]


def laplacian_variance(img: np.ndarray) -> float:
    """Variance of the 3x3 Laplacian response; a standard sharpness score.

    3-channel inputs are converted to luma first. Constant and affine-ramp
    images score ~0; blur always lowers the score.
    """
    img = as_image(img)
    if img.shape[2] == 3:
        img = rgb_to_luma(img)
    plane = img[:, :, 0]
    padded = np.pad(plane, 1, mode="reflect")
    response = correlate2d(np.ascontiguousarray(padded), 3, 3, LAPLACIAN_STENCIL)
    return float(np.var(response))
