"""Processed camera sensor noise via a reverse-forward ISP round trip.

Forward pipeline: demosaic (Malvar gradient-corrected), exposure gain, white
balance, camera -> XYZ(D50) color correction, XYZ(D50) -> linear RGB, tone
mapping, sRGB gamma. The reverse pipeline inverts the stages in the opposite
order and mosaics back to a Bayer plane. Raw noise is heteroscedastic:
variance = shot * signal + read.

The calibration pool (forward-matrix pairs plus tone curves) is synthetic;
real camera metadata can be supplied through the documented JSON pool format.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .image import as_image, clamp01, filter2d_reflect

POOL_SCHEMA_VERSION = 1
TONE_TABLE_SIZE = 1025
TONE_GRID = np.linspace(0.0, 1.0, TONE_TABLE_SIZE)

BAYER_PATTERNS = ("RGGB", "BGGR", "GRBG", "GBRG")

# XYZ(D50) -> linear sRGB (Bradford-adapted), the standard fixed matrix.
XYZ_D50_TO_LINRGB = np.array(
    [
        [3.1338561, -1.6168667, -0.4906146],
        [-0.9787684, 1.9161415, 0.0334540],
        [0.0719453, -0.2289914, 1.4052427],
    ]
)
LINRGB_TO_XYZ_D50 = np.linalg.inv(XYZ_D50_TO_LINRGB)
XYZ_D50_WHITE = np.array([0.96422, 1.0, 0.82521])

EXPOSURE_LOG2_RANGE = (-0.1, 0.3)
WB_GAIN_RANGE = (1.2, 2.4)
SHOT_NOISE_RANGE = (1e-4, 1.2e-2)
READ_NOISE_MODEL = (2.18, 1.20, 0.26)  # log read ~ N(a * log shot + b, s)

# Malvar/He/Cutler gradient-corrected 5x5 stencils (x1/8).
_G_AT_RB = np.array(
    [
        [0, 0, -1, 0, 0],
        [0, 0, 2, 0, 0],
        [-1, 2, 4, 2, -1],
        [0, 0, 2, 0, 0],
        [0, 0, -1, 0, 0],
    ],
    dtype=np.float64,
) / 8.0
_RB_AT_G_ROW = np.array(
    [
        [0, 0, 0.5, 0, 0],
        [0, -1, 0, -1, 0],
        [-1, 4, 5, 4, -1],
        [0, -1, 0, -1, 0],
        [0, 0, 0.5, 0, 0],
    ],
    dtype=np.float64,
) / 8.0
_RB_AT_G_COL = _RB_AT_G_ROW.T.copy()
_RB_AT_OPPOSITE = np.array(
    [
        [0, 0, -1.5, 0, 0],
        [0, 2, 0, 2, 0],
        [-1.5, 0, 6, 0, -1.5],
        [0, 2, 0, 2, 0],
        [0, 0, -1.5, 0, 0],
    ],
    dtype=np.float64,
) / 8.0


@dataclass(frozen=True)
class CameraParams:
    """One sampled ISP configuration."""

    exposure_gain: float
    red_gain: float
    blue_gain: float
    ccm: tuple  # 3x3 nested tuple, camera RGB -> XYZ(D50)
    ccm_weight: float
    ccm_entry: str
    tone_curve_id: str
    shot_noise: float
    read_noise: float

    def ccm_matrix(self) -> np.ndarray:
        return np.asarray(self.ccm, dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "exposure_gain": self.exposure_gain,
            "red_gain": self.red_gain,
            "blue_gain": self.blue_gain,
            "ccm": [list(row) for row in self.ccm],
            "ccm_weight": self.ccm_weight,
            "ccm_entry": self.ccm_entry,
            "tone_curve_id": self.tone_curve_id,
            "shot_noise": self.shot_noise,
            "read_noise": self.read_noise,
        }

    @staticmethod
    def from_dict(d: dict) -> "CameraParams":
        d = dict(d)
        d["ccm"] = tuple(tuple(float(v) for v in row) for row in d["ccm"])
        return CameraParams(**d)


class CalibrationPool:
    """Immutable set of calibration entries; shareable across threads."""

    def __init__(self, entries: list, pool_id: Optional[str] = None):
        if not entries:
            raise ValueError("calibration pool is empty")
        for e in entries:
            _validate_entry(e)
        self.entries = entries
        self.pool_id = pool_id or _pool_digest(entries)

    def __len__(self):
        return len(self.entries)

    def tone_curve(self, curve_id: str) -> np.ndarray:
        for e in self.entries:
            if e["name"] == curve_id:
                return e["tone_curve"]
        raise KeyError(f"tone curve {curve_id!r} not in pool {self.pool_id[:12]}")


def _validate_entry(e: dict) -> None:
    for key in ("forward_matrix_1", "forward_matrix_2"):
        m = np.asarray(e[key], dtype=np.float64)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ValueError(f"{key} of entry {e.get('name')} is not a finite 3x3")
    curve = np.asarray(e["tone_curve"], dtype=np.float64)
    if curve.shape != (TONE_TABLE_SIZE,):
        raise ValueError(f"tone curve must hold {TONE_TABLE_SIZE} samples")
    if abs(curve[0]) > 1e-9 or abs(curve[-1] - 1.0) > 1e-9:
        raise ValueError("tone curve must map 0 -> 0 and 1 -> 1")
    if np.any(np.diff(curve) <= 0):
        raise ValueError("tone curve must be strictly increasing")
    e["tone_curve"] = curve
    e["forward_matrix_1"] = np.asarray(e["forward_matrix_1"], dtype=np.float64)
    e["forward_matrix_2"] = np.asarray(e["forward_matrix_2"], dtype=np.float64)


def _pool_digest(entries: list) -> str:
    payload = json.dumps(
        [
            {
                "name": e["name"],
                "forward_matrix_1": np.asarray(e["forward_matrix_1"]).tolist(),
                "forward_matrix_2": np.asarray(e["forward_matrix_2"]).tolist(),
                "tone_curve": np.asarray(e["tone_curve"]).tolist(),
            }
            for e in entries
        ],
        sort_keys=True,
    ).encode()
    return hashlib.sha256(payload).hexdigest()


def _row_normalized(base: np.ndarray, perturbation: np.ndarray) -> np.ndarray:
    """Perturb a camera->XYZ matrix, rescaling rows so that the camera
    neutral (1,1,1) still maps to the D50 white point."""
    m = base * (1.0 + perturbation)
    return m * (XYZ_D50_WHITE / m.sum(axis=1))[:, None]


def _smoothstep_curve() -> np.ndarray:
    x = TONE_GRID
    return 3.0 * x**2 - 2.0 * x**3


def _gamma_curve(gamma: float) -> np.ndarray:
    return TONE_GRID ** (1.0 / gamma)


def builtin_pool() -> CalibrationPool:
    """Three synthetic calibration entries: perturbed forward-matrix pairs
    with a smoothstep tone curve and two gamma-family curves."""
    base = LINRGB_TO_XYZ_D50
    deltas = [
        (
            np.array([[0.04, -0.03, 0.02], [-0.02, 0.03, -0.04], [0.01, -0.02, 0.03]]),
            np.array([[-0.03, 0.05, -0.01], [0.04, -0.02, 0.01], [-0.02, 0.03, -0.05]]),
        ),
        (
            np.array([[0.06, 0.02, -0.05], [-0.04, 0.05, 0.02], [0.03, -0.06, 0.01]]),
            np.array([[-0.05, -0.01, 0.04], [0.02, -0.04, 0.06], [-0.01, 0.05, -0.03]]),
        ),
        (
            np.array([[0.02, -0.06, 0.04], [0.05, -0.01, -0.03], [-0.04, 0.02, 0.06]]),
            np.array([[-0.01, 0.04, -0.06], [-0.05, 0.03, 0.02], [0.06, -0.03, -0.02]]),
        ),
    ]
    # Mild gamma exponents: they compose with the later sRGB encode, and an
    # aggressive shadow-expanding curve would amplify demosaic error in the
    # near-black raw domain far beyond what real renderings do.
    curves = [_smoothstep_curve(), _gamma_curve(1.15), _gamma_curve(0.85)]
    entries = [
        {
            "name": f"synthetic-{i}",
            "forward_matrix_1": _row_normalized(base, d1),
            "forward_matrix_2": _row_normalized(base, d2),
            "tone_curve": curve,
        }
        for i, ((d1, d2), curve) in enumerate(zip(deltas, curves))
    ]
    return CalibrationPool(entries)


_BUILTIN_POOL: Optional[CalibrationPool] = None


def default_pool() -> CalibrationPool:
    global _BUILTIN_POOL
    if _BUILTIN_POOL is None:
        _BUILTIN_POOL = builtin_pool()
    return _BUILTIN_POOL


def load_pool(path) -> CalibrationPool:
    """Load a calibration pool from the documented JSON schema."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != POOL_SCHEMA_VERSION:
        raise ValueError(
            f"pool schema {doc.get('schema_version')!r} unsupported, "
            f"expected {POOL_SCHEMA_VERSION}"
        )
    return CalibrationPool(doc["entries"])


def save_pool(path, pool: CalibrationPool) -> None:
    doc = {
        "schema_version": POOL_SCHEMA_VERSION,
        "entries": [
            {
                "name": e["name"],
                "forward_matrix_1": e["forward_matrix_1"].tolist(),
                "forward_matrix_2": e["forward_matrix_2"].tolist(),
                "tone_curve": e["tone_curve"].tolist(),
            }
            for e in pool.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1))


# ---------------------------------------------------------------------------
# Bayer mosaic / demosaic
# ---------------------------------------------------------------------------

_PATTERN_LAYOUT = {
    "RGGB": ((0, 0), (1, 1)),  # (row, col) of the R site and of the B site
    "BGGR": ((1, 1), (0, 0)),
    "GRBG": ((0, 1), (1, 0)),
    "GBRG": ((1, 0), (0, 1)),
}


def mosaic(img: np.ndarray, pattern: str = "RGGB") -> np.ndarray:
    """Sample a 3-channel image down to a single Bayer plane."""
    img = as_image(img)
    h, w, c = img.shape
    if c != 3:
        raise ValueError("mosaic needs a 3-channel image")
    if h % 2 or w % 2:
        raise ValueError(f"Bayer dimensions must be even, got {h}x{w}")
    (ry, rx), (by, bx) = _PATTERN_LAYOUT[pattern]
    raw = img[:, :, 1].copy()  # green everywhere, then overwrite R/B sites
    raw[ry::2, rx::2] = img[ry::2, rx::2, 0]
    raw[by::2, bx::2] = img[by::2, bx::2, 2]
    return raw


def demosaic_malvar(raw: np.ndarray, pattern: str = "RGGB") -> np.ndarray:
    """Gradient-corrected linear demosaicing (Malvar-He-Cutler stencils)."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise ValueError("raw plane must be 2D")
    h, w = raw.shape
    if h % 2 or w % 2:
        raise ValueError(f"Bayer dimensions must be even, got {h}x{w}")
    plane = raw[:, :, None]
    resp_g = filter2d_reflect(plane, _G_AT_RB)[:, :, 0]
    resp_row = filter2d_reflect(plane, _RB_AT_G_ROW)[:, :, 0]
    resp_col = filter2d_reflect(plane, _RB_AT_G_COL)[:, :, 0]
    resp_diag = filter2d_reflect(plane, _RB_AT_OPPOSITE)[:, :, 0]

    (ry, rx), (by, bx) = _PATTERN_LAYOUT[pattern]
    out = np.empty((h, w, 3), dtype=np.float64)

    green = resp_g.copy()
    green[ry::2, 1 - rx::2] = raw[ry::2, 1 - rx::2]
    green[1 - ry::2, rx::2] = raw[1 - ry::2, rx::2]
    out[:, :, 1] = green

    red = np.empty((h, w))
    red[ry::2, rx::2] = raw[ry::2, rx::2]
    red[ry::2, 1 - rx::2] = resp_row[ry::2, 1 - rx::2]  # G sharing the R row
    red[1 - ry::2, rx::2] = resp_col[1 - ry::2, rx::2]  # G sharing the R column
    red[by::2, bx::2] = resp_diag[by::2, bx::2]
    out[:, :, 0] = red

    blue = np.empty((h, w))
    blue[by::2, bx::2] = raw[by::2, bx::2]
    blue[by::2, 1 - bx::2] = resp_row[by::2, 1 - bx::2]
    blue[1 - by::2, bx::2] = resp_col[1 - by::2, bx::2]
    blue[ry::2, rx::2] = resp_diag[ry::2, rx::2]
    out[:, :, 2] = blue
    return out


# ---------------------------------------------------------------------------
# Tone mapping and transfer curves
# ---------------------------------------------------------------------------


def tone_apply(x: np.ndarray, curve: np.ndarray) -> np.ndarray:
    return np.interp(x, TONE_GRID, curve)


def tone_invert(y: np.ndarray, curve: np.ndarray) -> np.ndarray:
    """Invert a tabulated monotone curve by interpolation on its values."""
    return np.interp(y, curve, TONE_GRID)


def gamma_encode(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * x ** (1 / 2.4) - 0.055)


def gamma_decode(y: np.ndarray) -> np.ndarray:
    y = np.clip(y, 0.0, 1.0)
    return np.where(y <= 0.04045, y / 12.92, ((y + 0.055) / 1.055) ** 2.4)


# ---------------------------------------------------------------------------
# Forward / reverse pipeline
# ---------------------------------------------------------------------------


def _wb_gains(cam: CameraParams) -> np.ndarray:
    return np.array([cam.red_gain, 1.0, cam.blue_gain]) * cam.exposure_gain


def forward_isp(raw: np.ndarray, cam: CameraParams, pool: CalibrationPool,
                pattern: str = "RGGB") -> np.ndarray:
    """Render a Bayer plane to display RGB through the sampled camera model."""
    # Clip the stencil overshoot: the reference demosaic runs in saturating
    # integer arithmetic, so values outside the raw range never escape it.
    rgb = np.clip(demosaic_malvar(raw, pattern), 0.0, 1.0)
    rgb = rgb * _wb_gains(cam)  # exposure folded into per-channel gain
    rgb = rgb @ cam.ccm_matrix().T
    rgb = rgb @ XYZ_D50_TO_LINRGB.T
    rgb = np.clip(rgb, 0.0, 1.0)
    rgb = tone_apply(rgb, pool.tone_curve(cam.tone_curve_id))
    rgb = gamma_encode(rgb)
    return clamp01(rgb)


def reverse_isp(img: np.ndarray, cam: CameraParams, pool: CalibrationPool,
                pattern: str = "RGGB") -> np.ndarray:
    """Unprocess display RGB back to a synthetic Bayer plane."""
    img = as_image(img)
    if img.shape[2] != 3:
        raise ValueError("reverse ISP needs a 3-channel image")
    if img.shape[0] % 2 or img.shape[1] % 2:
        raise ValueError("reverse ISP needs even dimensions")
    ccm = cam.ccm_matrix()
    det = np.linalg.det(ccm)
    if abs(det) < 1e-8:
        raise ValueError("singular color correction matrix")
    x = gamma_decode(clamp01(img))
    x = tone_invert(x, pool.tone_curve(cam.tone_curve_id))
    x = x @ LINRGB_TO_XYZ_D50.T
    x = x @ np.linalg.inv(ccm).T
    x = x / _wb_gains(cam)
    return mosaic(clamp01(x), pattern)


def add_raw_noise(
    raw: np.ndarray, shot: float, read: float, rng: np.random.Generator
) -> np.ndarray:
    """Heteroscedastic raw noise: per-site variance shot * value + read."""
    if shot < 0 or read < 0:
        raise ValueError("shot and read must be nonnegative")
    raw = np.asarray(raw, dtype=np.float64)
    std = np.sqrt(shot * raw + read)
    return np.clip(raw + std * rng.standard_normal(raw.shape), 0.0, 1.0)


def _det3(m) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def sample_camera_params(
    pool: CalibrationPool,
    rng: np.random.Generator,
    shot_noise_range: tuple = SHOT_NOISE_RANGE,
    read_noise_model: tuple = READ_NOISE_MODEL,
) -> CameraParams:
    """Draw one ISP configuration. The color-matrix entry and the tone curve
    are chosen independently. Draw order is frozen: exposure, red gain, blue
    gain, ccm entry, ccm weight, tone entry, shot, read."""
    if len(pool) == 0:
        raise ValueError("empty calibration pool")
    exposure = 2.0 ** rng.uniform(*EXPOSURE_LOG2_RANGE)
    red = rng.uniform(*WB_GAIN_RANGE)
    blue = rng.uniform(*WB_GAIN_RANGE)
    i_ccm = int(rng.integers(0, len(pool)))
    weight = float(rng.uniform())
    entry = pool.entries[i_ccm]
    ccm = weight * entry["forward_matrix_1"] + (1.0 - weight) * entry["forward_matrix_2"]
    if abs(_det3(ccm)) < 1e-8:
        raise ValueError(f"singular ccm sampled from entry {entry['name']}")
    i_tone = int(rng.integers(0, len(pool)))
    log_shot = rng.uniform(math.log(shot_noise_range[0]), math.log(shot_noise_range[1]))
    a, b, s = read_noise_model
    log_read = rng.normal(a * log_shot + b, s)
    return CameraParams(
        exposure_gain=float(exposure),
        red_gain=float(red),
        blue_gain=float(blue),
        ccm=tuple(tuple(float(v) for v in row) for row in ccm),
        ccm_weight=weight,
        ccm_entry=entry["name"],
        tone_curve_id=pool.entries[i_tone]["name"],
        shot_noise=float(math.exp(log_shot)),
        read_noise=float(math.exp(log_read)),
    )


def apply_sensor_noise(
    img: np.ndarray,
    cam: CameraParams,
    pool: CalibrationPool,
    rng: np.random.Generator,
    pattern: str = "RGGB",
    shot: Optional[float] = None,
    read: Optional[float] = None,
) -> np.ndarray:
    """reverse ISP -> raw noise -> forward ISP with fixed camera params.

    Odd-sized inputs are reflect-padded by one row/column and cropped back.
    `shot`/`read` override the sampled levels (zero disables noise, leaving
    the bare mosaic/demosaic round trip).
    """
    img = as_image(img)
    h, w = img.shape[:2]
    pad_h, pad_w = h % 2, w % 2
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w), (0, 0)), mode="reflect")
    raw = reverse_isp(img, cam, pool, pattern)
    raw = add_raw_noise(
        raw,
        cam.shot_noise if shot is None else shot,
        cam.read_noise if read is None else read,
        rng,
    )
    out = forward_isp(raw, cam, pool, pattern)
    return out[:h, :w, :]


def processed_sensor_noise(
    img: np.ndarray,
    pool: CalibrationPool,
    rng: np.random.Generator,
    pattern: str = "RGGB",
    shot: Optional[float] = None,
    read: Optional[float] = None,
) -> np.ndarray:
    """Sample one camera configuration and run the noisy round trip."""
    cam = sample_camera_params(pool, rng)
    return apply_sensor_noise(img, cam, pool, rng, pattern, shot=shot, read=read)
