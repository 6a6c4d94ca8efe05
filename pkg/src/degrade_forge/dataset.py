"""Batch tooling: paired LR/HR dataset generation, benchmark test sets,
sharpness filtering, and aligned patch cropping.

Output layout: <out>/{HR,LR,manifests}/<stem>_v<variant>.<ext>. Items are
embarrassingly parallel; each (image, variant) owns an rng substream keyed
by (master seed, variant, pixel hash), so trees are byte-identical across
runs and worker counts.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .blur_kernels import BlurSpec, sample_blur_spec
from .config import DEFAULT_SHARPNESS_THRESHOLD, DegradationConfig
from .degradations import DownSpec, nearest_preblur_range
from .fileio import IMAGE_SUFFIXES, read_image, write_png
from .image import as_image, laplacian_variance
from .jpeg import JpegSpec
from .pipeline import (
    SLOT_BLUR_ANISO,
    SLOT_DOWNSAMPLE,
    DegradationPlan,
    PipelineResult,
    PlanOp,
    classic_plan,
    degrade,
    execute_plan,
    resolve_pool,
)
from .rng import image_generator, patch_generator

log = logging.getLogger("degrade_forge")

LR_PATCH_SIZE = 72
TESTSET_QUALITY_RANGE = (41, 90)  # type-III final JPEG


@dataclass
class DatasetJob:
    input_dir: str
    output_dir: str
    config: DegradationConfig = field(default_factory=DegradationConfig)
    master_seed: int = 0
    variants: int = 1
    workers: int = 1
    patches_per_item: int = 0
    sharpness_threshold: float = DEFAULT_SHARPNESS_THRESHOLD

    def __post_init__(self):
        if self.variants < 1 or self.workers < 1:
            raise ValueError("variants and workers must be >= 1")
        if self.patches_per_item < 0:
            raise ValueError("patches_per_item must be >= 0")


def list_images(directory) -> list:
    root = Path(directory)
    return sorted(
        p for p in root.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def center_crop_divisible(img: np.ndarray, divisor: int) -> np.ndarray:
    """Center-crop so both dimensions are multiples of `divisor`."""
    img = as_image(img)
    h, w = img.shape[:2]
    ch, cw = (h // divisor) * divisor, (w // divisor) * divisor
    if ch < divisor or cw < divisor:
        raise ValueError(f"{h}x{w} smaller than divisor {divisor}")
    top, left = (h - ch) // 2, (w - cw) // 2
    return np.ascontiguousarray(img[top : top + ch, left : left + cw])


def crop_patch_pairs(hr: np.ndarray, lr: np.ndarray, scale: int, count: int,
                     rng: np.random.Generator,
                     patch_size: int = LR_PATCH_SIZE) -> list:
    """Aligned (lr_patch, hr_patch) pairs: LR origin uniform, HR origin
    scaled by s; patch sizes patch_size and patch_size * s."""
    hr = as_image(hr)
    lr = as_image(lr)
    lh, lw = lr.shape[:2]
    if hr.shape[0] != lh * scale or hr.shape[1] != lw * scale:
        raise ValueError(
            f"HR {hr.shape[:2]} is not LR {lr.shape[:2]} times scale {scale}"
        )
    if lh < patch_size or lw < patch_size:
        raise ValueError(f"LR {lh}x{lw} smaller than patch {patch_size}")
    pairs = []
    for _ in range(count):
        r = int(rng.integers(0, lh - patch_size + 1))
        c = int(rng.integers(0, lw - patch_size + 1))
        lr_patch = lr[r : r + patch_size, c : c + patch_size]
        hr_patch = hr[
            r * scale : (r + patch_size) * scale, c * scale : (c + patch_size) * scale
        ]
        pairs.append((np.ascontiguousarray(lr_patch), np.ascontiguousarray(hr_patch)))
    return pairs


def _write_result(out: Path, stem: str, hr: np.ndarray, result: PipelineResult) -> None:
    write_png(out / "HR" / f"{stem}.png", hr)
    ext = "jpg" if result.lr_format == "jpeg" else "png"
    lr_path = out / "LR" / f"{stem}.{ext}"
    lr_path.parent.mkdir(parents=True, exist_ok=True)
    lr_path.write_bytes(result.lr_bytes)
    man_path = out / "manifests" / f"{stem}.json"
    man_path.parent.mkdir(parents=True, exist_ok=True)
    man_path.write_text(result.manifest.to_json())


def generate_pairs(job: DatasetJob) -> dict:
    """Degrade every accepted HR image `variants` times; returns a summary."""
    out = Path(job.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    pool = resolve_pool(job.config)
    divisor = 4 * job.config.scale
    summary = {
        "processed": 0,
        "emitted": 0,
        "rejected_blurry": 0,
        "rejected_small": 0,
        "skipped_unreadable": 0,
        "sharpness_threshold": job.sharpness_threshold,
    }

    accepted = []
    for path in list_images(job.input_dir):
        try:
            img = read_image(path)
        except Exception as exc:
            log.warning("skipping unreadable %s: %s", path.name, exc)
            summary["skipped_unreadable"] += 1
            continue
        if laplacian_variance(img) < job.sharpness_threshold:
            summary["rejected_blurry"] += 1
            continue
        try:
            hr = center_crop_divisible(img, divisor)
        except ValueError:
            summary["rejected_small"] += 1
            continue
        accepted.append((path, hr))

    def run_item(item):
        path, hr = item
        for v in range(job.variants):
            stem = f"{path.stem}_v{v}"
            result = degrade(hr, job.config, job.master_seed, variant=v, path=str(path),
                             pool=pool)
            _write_result(out, stem, hr, result)
            if job.patches_per_item > 0:
                prng = patch_generator(job.master_seed, v, hr)
                pairs = crop_patch_pairs(
                    hr, result.lr, job.config.scale, job.patches_per_item, prng
                )
                for i, (lp, hp) in enumerate(pairs):
                    write_png(out / "LR_patches" / f"{stem}_p{i}.png", lp)
                    write_png(out / "HR_patches" / f"{stem}_p{i}.png", hp)
        return job.variants

    if job.workers == 1:
        counts = [run_item(item) for item in accepted]
    else:
        with ThreadPoolExecutor(max_workers=job.workers) as pool_exec:
            counts = list(pool_exec.map(run_item, accepted))
    summary["processed"] = len(accepted)
    summary["emitted"] = sum(counts)
    return summary


def _testset_plan(kind: int, scale_cfg: DegradationConfig,
                  rng: np.random.Generator) -> Optional[DegradationPlan]:
    """Fixed-structure plans for benchmark types I-III (IV samples the full
    pipeline and is handled by the caller)."""
    if kind == 1:
        return classic_plan("bicubic", 4)
    if kind == 2:
        blur = sample_blur_spec(4, "aniso", rng)
        lo, hi = nearest_preblur_range(4)
        down = DownSpec(method="nearest", scale=4, pre_blur_sigma=float(rng.uniform(lo, hi)))
        return DegradationPlan(
            scale=4,
            ops=(
                PlanOp(SLOT_BLUR_ANISO, True, blur),
                PlanOp(SLOT_DOWNSAMPLE, True, down),
            ),
            final_jpeg=None,
        )
    if kind == 3:
        blur = sample_blur_spec(2, "aniso", rng)
        lo, hi = nearest_preblur_range(2)
        down1 = DownSpec(method="nearest", scale=2, pre_blur_sigma=float(rng.uniform(lo, hi)))
        down2 = DownSpec(method="bicubic", scale=2)
        quality = int(rng.integers(TESTSET_QUALITY_RANGE[0], TESTSET_QUALITY_RANGE[1] + 1))
        return DegradationPlan(
            scale=4,
            ops=(
                PlanOp(SLOT_BLUR_ANISO, True, blur),
                PlanOp(SLOT_DOWNSAMPLE, True, down1),
                PlanOp(SLOT_DOWNSAMPLE, True, down2),
            ),
            final_jpeg=JpegSpec(quality=quality),
        )
    return None


def make_testset(kind: int, hr_dir, out_dir, seed: int,
                 config: Optional[DegradationConfig] = None,
                 workers: int = 1) -> dict:
    """Regenerate one of the four benchmark degradation types at scale 4.

    I: bicubic downscale (lossless LR). II: anisotropic blur + shift-corrected
    nearest x4. III: anisotropic blur + nearest x2 + bicubic x2 + JPEG with
    quality ~ U{41..90}. IV: the full randomized pipeline.
    """
    if kind not in (1, 2, 3, 4):
        raise ValueError(f"testset kind must be 1..4, got {kind}")
    config = config or DegradationConfig(scale=4)
    if kind == 4 and config.scale != 4:
        raise ValueError("type-IV test sets use scale 4")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pool = resolve_pool(config)
    summary = {"kind": kind, "processed": 0, "skipped_unreadable": 0, "rejected_small": 0}

    items = []
    for path in list_images(hr_dir):
        try:
            img = read_image(path)
        except Exception as exc:
            log.warning("skipping unreadable %s: %s", path.name, exc)
            summary["skipped_unreadable"] += 1
            continue
        try:
            hr = center_crop_divisible(img, 16)
        except ValueError:
            summary["rejected_small"] += 1
            continue
        items.append((path, hr))

    def run_item(item):
        path, hr = item
        stem = f"{path.stem}_v0"
        if kind == 4:
            result = degrade(hr, config, seed, variant=0, path=str(path), pool=pool)
        else:
            rng = image_generator(seed, 0, hr)
            plan = _testset_plan(kind, config, rng)
            result = execute_plan(hr, plan, pool)
            result.manifest.input["path"] = str(path)
            result.manifest.seed = {"master_seed": int(seed), "variant": 0}
        _write_result(out, stem, hr, result)

    if workers == 1:
        for item in items:
            run_item(item)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            list(pool_exec.map(run_item, items))
    summary["processed"] = len(items)
    return summary
