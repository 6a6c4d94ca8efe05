"""Deterministic random-stream derivation.

All randomness flows through numpy's Philox counter-based generator seeded
via SeedSequence, whose algorithms are frozen by numpy's compatibility
policy, so streams are bit-reproducible across platforms. Per-image streams
are keyed by (master seed, variant index, pixel content hash); per-operator
execution streams get their own 64-bit keys drawn at plan-sampling time and
recorded in the manifest.
"""

import hashlib
import struct

import numpy as np

RNG_ALGORITHM = "numpy-seedseq-philox4x64-10/v1"

_IMAGE_DOMAIN = 0x64666F_72676501  # distinct stream domains
_PATCH_DOMAIN = 0x64666F_72676502


def make_generator(*entropy: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(entropy))))


def generator_from_key(key: int) -> np.random.Generator:
    return make_generator(int(key))


def draw_key(rng: np.random.Generator) -> int:
    """A fresh 64-bit substream key, recordable in a manifest."""
    return int(rng.integers(0, 2**64, dtype=np.uint64))


def pixel_digest(img: np.ndarray) -> bytes:
    """Content hash of an image array (shape + float64 sample bytes)."""
    arr = np.ascontiguousarray(np.asarray(img, dtype=np.float64))
    h = hashlib.sha256()
    h.update(b"degrade-forge-pixels-v1")
    h.update(struct.pack(f"<{arr.ndim}q", *arr.shape))
    h.update(arr.tobytes())
    return h.digest()


def pixel_sha256(img: np.ndarray) -> str:
    return pixel_digest(img).hex()


def _digest_words(digest: bytes) -> tuple:
    return tuple(int.from_bytes(digest[i : i + 8], "little") for i in range(0, 32, 8))


def image_generator(master_seed: int, variant: int, img: np.ndarray) -> np.random.Generator:
    """The per-image plan-sampling stream; independent of scheduling order."""
    return make_generator(
        _IMAGE_DOMAIN, int(master_seed), int(variant), *_digest_words(pixel_digest(img))
    )


def patch_generator(master_seed: int, variant: int, img: np.ndarray) -> np.random.Generator:
    """A separate stream for patch-crop origins so patch emission does not
    perturb the degradation draws."""
    return make_generator(
        _PATCH_DOMAIN, int(master_seed), int(variant), *_digest_words(pixel_digest(img))
    )
