"""Baseline JPEG compression noise.

Encoding is delegated to Pillow (libjpeg), which implements the IJG quality
scaling this module documents and tests pin down: scale = 5000/Q for Q < 50
else 200 - 2Q, table entry = clamp((base * scale + 50) / 100, 1, 255) over
the Annex-K base tables, integer arithmetic throughout. Streams are baseline
JFIF with 4:2:0 chroma subsampling, decodable by any compliant decoder.
"""

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

QUALITY_RANGE = (30, 95)

# ITU-T T.81 Annex K.1 base quantization tables, natural (row-major) order.
BASE_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)
BASE_CHROMA_TABLE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)

# Natural-order index of each entry in zigzag scan order.
ZIGZAG_ORDER = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
    ],
    dtype=np.int64,
)


@dataclass(frozen=True)
class JpegSpec:
    quality: int
    chroma_subsampling: str = "4:2:0"

    def __post_init__(self):
        if not (QUALITY_RANGE[0] <= self.quality <= QUALITY_RANGE[1]):
            raise ValueError(
                f"quality {self.quality} outside {QUALITY_RANGE}"
            )
        if self.chroma_subsampling != "4:2:0":
            raise ValueError("only 4:2:0 subsampling is supported")

    def to_dict(self) -> dict:
        return {"quality": self.quality, "chroma_subsampling": self.chroma_subsampling}

    @staticmethod
    def from_dict(d: dict) -> "JpegSpec":
        return JpegSpec(**d)


def ijg_quality_scaling(quality: int) -> int:
    """IJG quality-to-scale mapping (integer arithmetic, as in libjpeg)."""
    quality = int(quality)
    if quality <= 0 or quality > 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    if quality < 50:
        return 5000 // quality
    return 200 - quality * 2


def ijg_quant_tables(quality: int):
    """Expected (luma, chroma) quantization tables at a quality factor,
    natural order, baseline-clamped to [1, 255]."""
    scale = ijg_quality_scaling(quality)
    luma = np.clip((BASE_LUMA_TABLE * scale + 50) // 100, 1, 255)
    chroma = np.clip((BASE_CHROMA_TABLE * scale + 50) // 100, 1, 255)
    return luma, chroma


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize a unit-range image to 8 bits: round(v * 255), clamped."""
    return np.clip(np.rint(np.clip(img, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)


def encode_jpeg(img: np.ndarray, quality: int) -> bytes:
    """Encode to baseline JFIF bytes with 4:2:0 subsampling."""
    arr = to_uint8(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    mode = "RGB" if arr.ndim == 3 else "L"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(
        buf, format="JPEG", quality=int(quality), subsampling=2
    )
    return buf.getvalue()


def decode_jpeg(data: bytes) -> np.ndarray:
    """Decode JPEG bytes back to a float image (8-bit values / 255)."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            arr = np.asarray(im.convert("RGB") if im.mode != "L" else im)
    except Exception as exc:
        raise ValueError(f"JPEG decode failed: {exc}") from exc
    out = arr.astype(np.float64) / 255.0
    if out.ndim == 2:
        out = out[:, :, None]
    return out


def jpeg_noise(img: np.ndarray, spec: JpegSpec) -> np.ndarray:
    """One lossy JPEG round trip at the given quality factor."""
    return decode_jpeg(encode_jpeg(img, spec.quality))
