"""Separable image resampling in the reference-resize convention.

Conventions (matching the de-facto standard resizer used in SR work):
  * align-centers mapping: output pixel i samples source coordinate
    u = (i + 0.5) / scale - 0.5, per axis;
  * bicubic uses the Keys cubic convolution kernel with a = -0.5;
  * when downscaling with antialias, the kernel is stretched by 1/scale;
  * out-of-range taps use symmetric (edge-repeating) extension;
  * nearest is a pure gather and is never antialiased.

The per-axis weight tables are computed once in float64 and applied by the
backend gather kernel, height pass first, then width.
"""

import numpy as np

from .backend import resample_rows
from .image import as_image

METHODS = ("nearest", "bilinear", "bicubic")


def cubic_kernel(d: np.ndarray) -> np.ndarray:
    """Keys cubic convolution kernel, a = -0.5, support [-2, 2]."""
    x = np.abs(d)
    x2 = x * x
    x3 = x2 * x
    inner = 1.5 * x3 - 2.5 * x2 + 1.0
    outer = -0.5 * x3 + 2.5 * x2 - 4.0 * x + 2.0
    return np.where(x <= 1.0, inner, np.where(x < 2.0, outer, 0.0))


def linear_kernel(d: np.ndarray) -> np.ndarray:
    return np.maximum(1.0 - np.abs(d), 0.0)


_KERNELS = {"bilinear": (linear_kernel, 2.0), "bicubic": (cubic_kernel, 4.0)}


def _symmetric_index(idx: np.ndarray, n: int) -> np.ndarray:
    """Map out-of-range indices by symmetric extension (edge repeated)."""
    m = np.mod(idx, 2 * n)
    return np.where(m < n, m, 2 * n - 1 - m)


def _contributions(in_len: int, out_len: int, method: str, antialias: bool):
    """Tap indices and normalized weights for one axis."""
    kern, support = _KERNELS[method]
    scale = out_len / in_len
    u = (np.arange(out_len, dtype=np.float64) + 0.5) / scale - 0.5
    if antialias and scale < 1.0:
        width = support / scale
        def h(d):
            return scale * kern(scale * d)
    else:
        width = support
        h = kern
    n_taps = int(np.ceil(width)) + 2
    left = np.floor(u - width / 2.0).astype(np.int64)
    idx = left[:, None] + np.arange(n_taps, dtype=np.int64)[None, :]
    weights = h(u[:, None] - idx)
    weights = weights / weights.sum(axis=1, keepdims=True)
    return _symmetric_index(idx, in_len), weights


def _nearest_index(in_len: int, out_len: int) -> np.ndarray:
    scale = out_len / in_len
    u = (np.arange(out_len, dtype=np.float64) + 0.5) / scale - 0.5
    return np.clip(np.floor(u + 0.5).astype(np.int64), 0, in_len - 1)


def resize(
    img: np.ndarray,
    out_h: int,
    out_w: int,
    method: str = "bicubic",
    antialias: bool = True,
) -> np.ndarray:
    """Resample to (out_h, out_w). Linear and unclamped (bicubic can overshoot)."""
    img = as_image(img)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target size {out_h}x{out_w} must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    h, w, c = img.shape
    if method == "nearest":
        iy = _nearest_index(h, out_h)
        ix = _nearest_index(w, out_w)
        return np.ascontiguousarray(img[iy][:, ix])

    iy, wy = _contributions(h, out_h, method, antialias)
    ix, wx = _contributions(w, out_w, method, antialias)
    flat = np.ascontiguousarray(img.reshape(h, w * c))
    rows = resample_rows(flat, np.ascontiguousarray(iy), np.ascontiguousarray(wy))
    cols_in = np.ascontiguousarray(
        rows.reshape(out_h, w, c).transpose(1, 0, 2).reshape(w, out_h * c)
    )
    cols = resample_rows(cols_in, np.ascontiguousarray(ix), np.ascontiguousarray(wx))
    return np.ascontiguousarray(
        cols.reshape(out_w, out_h, c).transpose(1, 0, 2)
    )
