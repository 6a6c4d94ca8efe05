"""Reference quality metrics.

PSNR follows the SR reporting convention: computed on the BT.601 luma
channel of unit-range images, full frame (no border crop).
"""

import math

import numpy as np

from .image import as_image, rgb_to_luma


def psnr_y(a: np.ndarray, b: np.ndarray) -> float:
    """Luma-channel PSNR in dB; identical inputs return +inf."""
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.shape[2] != 3:
        raise ValueError("psnr_y expects 3-channel images")
    diff = rgb_to_luma(a) - rgb_to_luma(b)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
