"""Reading and writing images and raw pixel arrays.

PNG and baseline JPEG are read into unit-range float64; PNG output is
round(v * 255) clamped. `.npy` exchange accepts uint8 (divided by 255) or
float32/float64 pixels and is the array interface the CLI exposes to other
processes.
"""

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .image import as_image
from .jpeg import to_uint8

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def read_image(path) -> np.ndarray:
    """Decode a PNG/JPEG file to a 3-channel unit-range image."""
    path = Path(path)
    if path.suffix.lower() == ".npy":
        return read_npy(path)
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return arr.astype(np.float64) / 255.0


def write_png(path, img: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(_to_pil_array(img)).save(path, format="PNG")


def png_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_to_pil_array(img)).save(buf, format="PNG")
    return buf.getvalue()


def _to_pil_array(img: np.ndarray) -> np.ndarray:
    arr = to_uint8(as_image(img))
    if arr.shape[2] == 1:
        return arr[:, :, 0]
    return arr


def read_npy(path) -> np.ndarray:
    """Load a (H, W, C) pixel array: uint8 -> v/255, floats pass through."""
    arr = np.load(path)
    if arr.dtype == np.uint8:
        return as_image(arr.astype(np.float64) / 255.0)
    if arr.dtype in (np.float32, np.float64):
        return as_image(arr.astype(np.float64))
    raise ValueError(f"unsupported npy dtype {arr.dtype}")


def write_npy_f32(path, img: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.save(path, as_image(img).astype(np.float32))
