"""NumPy fallback for the hot inner loops.

Accumulation order is pinned: both kernels add contributions tap by tap, in
ascending tap order, in float64. The Cython backend follows the exact same
order (and is compiled with FP contraction off), so the two backends produce
bit-identical results and manifests replay the same way on either.
"""

import numpy as np

BACKEND_NAME = "python"


def correlate2d(padded: np.ndarray, kh: int, kw: int, kernel: np.ndarray) -> np.ndarray:
    """Valid-mode cross-correlation of a pre-padded single-channel plane.

    `padded` has shape (H + kh - 1, W + kw - 1); output has shape (H, W).
    No kernel flip: out[y, x] = sum_{i,j} kernel[i, j] * padded[y+i, x+j].
    """
    out_h = padded.shape[0] - kh + 1
    out_w = padded.shape[1] - kw + 1
    out = np.zeros((out_h, out_w), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            out += kernel[i, j] * padded[i : i + out_h, j : j + out_w]
    return out


def resample_rows(src: np.ndarray, indices: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted gather along axis 0: out[o, :] = sum_t weights[o, t] * src[indices[o, t], :]."""
    n_out, n_taps = indices.shape
    out = np.zeros((n_out, src.shape[1]), dtype=np.float64)
    for t in range(n_taps):
        out += weights[:, t : t + 1] * src[indices[:, t], :]
    return out
