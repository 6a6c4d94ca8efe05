"""Independent oracles and fixtures shared by the test suite.

Everything here is deliberately written without reusing the package's own
code paths: brute-force loops, scipy, and closed-form math only, so the
oracles stay independent of the implementations they check.
"""

import math

import numpy as np
from scipy.ndimage import gaussian_filter


# ---------------------------------------------------------------------------
# Synthetic natural-statistics corpus
# ---------------------------------------------------------------------------

def natural_image(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Textured image with natural-like statistics: shared luma detail,
    spatially smooth chroma, values in [0.22, 0.9]. This is the fixed test
    corpus; its texture is kept gentle at the 2-pixel scale so demosaic
    gradient corrections stay small relative to the dimmest raw channel."""
    rng = np.random.default_rng(seed)
    coarse = gaussian_filter(rng.random((h, w)), 4.0, mode="reflect")
    detail = gaussian_filter(rng.random((h, w)), 2.2, mode="reflect")
    luma = 1.4 * (coarse - coarse.mean()) + 0.3 * (detail - detail.mean())
    base = 0.5 + luma
    base -= base.min()
    base /= base.max()
    # luminance-gated fine grain: present in highlights, absent in shadows
    fine = gaussian_filter(rng.random((h, w)), 0.9, mode="reflect")
    base = base + 0.05 * base**2 * (fine - fine.mean()) / max(fine.std(), 1e-9)
    img = np.repeat(base[:, :, None], 3, axis=2)
    chroma = rng.random((h, w, 3))
    for c in range(3):
        img[:, :, c] += 0.4 * gaussian_filter(chroma[:, :, c] - 0.5, 8.0, mode="reflect")
    yy, xx = np.mgrid[0:h, 0:w]
    img[:, :, 0] += 0.05 * np.sin(2 * np.pi * yy / h * 1.7)
    img[:, :, 1] += 0.05 * np.cos(2 * np.pi * xx / w * 1.3)
    img[:, :, 2] += 0.04 * np.sin(2 * np.pi * (xx + yy) / (h + w) * 2.1)
    img -= img.min()
    img /= img.max()
    return np.ascontiguousarray(0.22 + 0.68 * img)


def corpus(count: int = 3, h: int = 96, w: int = 128):
    return [natural_image(h, w, seed=100 + i) for i in range(count)]


# ---------------------------------------------------------------------------
# Brute-force convolution with explicit reflection indexing
# ---------------------------------------------------------------------------

def reflect_index(i: int, n: int) -> int:
    """np.pad(mode='reflect') indexing: mirror without repeating the edge."""
    if n == 1:
        return 0
    period = 2 * n - 2
    i = i % period
    return i if i < n else period - i


def naive_correlate_reflect(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    yy = reflect_index(y + i - ph, h)
                    xx = reflect_index(x + j - pw, w)
                    acc += kernel[i, j] * plane[yy, xx]
            out[y, x] = acc
    return out


# ---------------------------------------------------------------------------
# Independently coded separable reference resizer (scalar loops)
# ---------------------------------------------------------------------------

def _ref_kernel(method: str, d: float) -> float:
    x = abs(d)
    if method == "bilinear":
        return max(0.0, 1.0 - x)
    if x <= 1.0:
        return 1.5 * x**3 - 2.5 * x**2 + 1.0
    if x < 2.0:
        return -0.5 * x**3 + 2.5 * x**2 - 4.0 * x + 2.0
    return 0.0


def _ref_axis_taps(n_in: int, n_out: int, method: str, antialias: bool):
    scale = n_out / n_in
    support = 2.0 if method == "bilinear" else 4.0
    stretch = antialias and scale < 1.0
    width = support / scale if stretch else support
    rows = []
    for i in range(n_out):
        u = (i + 0.5) / scale - 0.5
        lo = math.floor(u - width / 2.0)
        taps = []
        for j in range(lo, lo + int(math.ceil(width)) + 2):
            d = u - j
            wv = scale * _ref_kernel(method, scale * d) if stretch else _ref_kernel(method, d)
            jj = j % (2 * n_in)
            jj = jj if jj < n_in else 2 * n_in - 1 - jj  # symmetric extension
            taps.append((jj, wv))
        total = sum(wv for _, wv in taps)
        rows.append([(jj, wv / total) for jj, wv in taps])
    return rows


def reference_resize(img: np.ndarray, out_h: int, out_w: int, method: str,
                     antialias: bool = True) -> np.ndarray:
    """Separable align-centers resizer, written as plain scalar loops."""
    if img.ndim == 2:
        img = img[:, :, None]
    h, w, c = img.shape
    row_taps = _ref_axis_taps(h, out_h, method, antialias)
    col_taps = _ref_axis_taps(w, out_w, method, antialias)
    mid = np.zeros((out_h, w, c))
    for i, taps in enumerate(row_taps):
        for jj, wv in taps:
            mid[i] += wv * img[jj]
    out = np.zeros((out_h, out_w, c))
    for i, taps in enumerate(col_taps):
        for jj, wv in taps:
            out[:, i] += wv * mid[:, jj]
    return out


# ---------------------------------------------------------------------------
# Subpixel phase correlation (matrix-DFT refinement)
# ---------------------------------------------------------------------------

def _upsampled_dft(data: np.ndarray, region: int, factor: int, offsets):
    out = data
    for n_items, offset in zip(data.shape[::-1], offsets[::-1]):
        freqs = np.fft.fftfreq(n_items, factor)
        kernel = np.exp(-2j * np.pi * (np.arange(region) - offset)[:, None] * freqs)
        out = np.tensordot(kernel, out, axes=(1, -1))
    return out


def phase_offset(a: np.ndarray, b: np.ndarray, upsample: int = 100,
                 band: float = 0.25):
    """Translation (dy, dx) such that b is `a` with content moved by (dy, dx)
    toward larger indices (b ≈ roll(a, (dy, dx)) for pure shifts).

    The cross-spectrum is band-limited to |f| <= band cycles/px: the images
    being registered went through different resampling filters, and aliased
    energy near Nyquist would otherwise bias the fitted shift."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    win = np.hanning(a.shape[0])[:, None] * np.hanning(a.shape[1])[None, :]
    fa = np.fft.fft2((a - a.mean()) * win)
    fb = np.fft.fft2((b - b.mean()) * win)
    cross = fa * np.conj(fb)
    cross /= np.maximum(np.abs(cross), 1e-15)
    fy = np.fft.fftfreq(a.shape[0])[:, None]
    fx = np.fft.fftfreq(a.shape[1])[None, :]
    cross *= (fy**2 + fx**2) <= band**2
    corr = np.fft.ifft2(cross)
    peak = np.array(np.unravel_index(np.argmax(np.abs(corr)), corr.shape), dtype=np.float64)
    dims = np.array(corr.shape, dtype=np.float64)
    peak[peak > dims / 2] -= dims[peak > dims / 2]
    # refine around the coarse peak on an upsampled correlation surface
    region = int(np.ceil(upsample * 1.5))
    dft_shift = region // 2
    offsets = dft_shift - peak * upsample
    patch = np.abs(_upsampled_dft(np.conj(cross), region, upsample, offsets))
    sub = np.array(np.unravel_index(np.argmax(patch), patch.shape), dtype=np.float64)
    refined = peak + (sub - dft_shift) / upsample
    return -refined[0], -refined[1]


# ---------------------------------------------------------------------------
# JPEG DQT segment parsing
# ---------------------------------------------------------------------------

_ZIGZAG = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
]


def parse_dqt_tables(data: bytes) -> dict:
    """Quantization tables from a JPEG stream, de-zigzagged to natural
    8x8 order, keyed by table id."""
    assert data[:2] == b"\xff\xd8", "not a JPEG stream"
    tables = {}
    i = 2
    while i < len(data) - 1:
        assert data[i] == 0xFF, f"marker expected at {i}"
        marker = data[i + 1]
        if marker == 0xD9:
            break
        if marker == 0xDA:  # start of scan: entropy data follows
            break
        seg_len = int.from_bytes(data[i + 2 : i + 4], "big")
        if marker == 0xDB:
            j = i + 4
            end = i + 2 + seg_len
            while j < end:
                precision, table_id = data[j] >> 4, data[j] & 0x0F
                count = 64 * (2 if precision else 1)
                raw = list(data[j + 1 : j + 1 + count])
                natural = np.zeros(64, dtype=np.int64)
                natural[_ZIGZAG] = raw[:64]
                tables[table_id] = natural.reshape(8, 8)
                j += 1 + count
        i += 2 + seg_len
    return tables


def assert_decodable_jpeg(data: bytes):
    import io

    from PIL import Image

    with Image.open(io.BytesIO(data)) as im:
        im.load()
        return im.size
