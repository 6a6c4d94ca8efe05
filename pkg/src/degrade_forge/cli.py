"""Command-line interface.

Exit codes: 0 success, 1 job error, 2 bad arguments. The only environment
knob is DEGRADE_FORGE_LOG (log level name).
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import DEFAULT_SHARPNESS_THRESHOLD, load_config
from .dataset import DatasetJob, center_crop_divisible, generate_pairs, make_testset
from .fileio import read_image, write_npy_f32, write_png
from .metrics import psnr_y
from .pipeline import Manifest, degrade, execute_plan, resolve_pool, sample_plan
from .resize import resize
from .rng import make_generator

log = logging.getLogger("degrade_forge")


class JobError(RuntimeError):
    pass


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON config file (defaults otherwise)")
    p.add_argument("--scale", type=int, choices=(2, 4), default=None,
                   help="net downscale factor (overrides the config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degrade-forge",
        description="Synthesize degraded LR images from HR sources with "
        "replayable manifests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate paired LR/HR training data")
    p.add_argument("--in", dest="input_dir", required=True)
    p.add_argument("--out", dest="output_dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--patches", type=int, default=0,
                   help="aligned 72x72-LR patch pairs per item")
    p.add_argument("--min-sharpness", type=float, default=DEFAULT_SHARPNESS_THRESHOLD,
                   help="Laplacian-variance rejection threshold")
    _add_config_args(p)

    p = sub.add_parser("testset", help="regenerate a benchmark test set (scale 4)")
    p.add_argument("--kind", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--in", dest="input_dir", required=True)
    p.add_argument("--out", dest="output_dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None)

    p = sub.add_parser("psnr", help="luma PSNR between matching files")
    p.add_argument("--ref", required=True, help="reference image or directory")
    p.add_argument("--dist", required=True, help="distorted image or directory")

    p = sub.add_parser("replay", help="re-run a manifest on its HR image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--hr", required=True)
    p.add_argument("--out", required=True, help="encoded LR output path")
    p.add_argument("--out-npy", default=None, help="also write decoded LR as float32 npy")
    p.add_argument("--pool", default=None, help="calibration pool JSON")

    p = sub.add_parser("preview", help="degrade one image and write a contact sheet")
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output PNG (default: <stem>_preview.png)")
    _add_config_args(p)

    p = sub.add_parser("degrade", help="degrade one image (array-exchange entry point)")
    p.add_argument("--hr", required=True, help="HR input (.png/.jpg/.npy)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--out-lr", default=None, help="encoded LR bytes (.jpg/.png)")
    p.add_argument("--out-npy", default=None, help="decoded LR as float32 npy")
    p.add_argument("--out-manifest", default=None)
    _add_config_args(p)

    p = sub.add_parser("plan", help="sample a degradation plan as JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="output file (stdout otherwise)")
    _add_config_args(p)

    p = sub.add_parser("convert", help="convert between image files and npy arrays")
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--out", dest="output_path", required=True)
    return parser


def _print_summary(summary: dict) -> None:
    for key, val in summary.items():
        print(f"{key}: {val}")


def cmd_gen(args) -> int:
    cfg = load_config(args.config, args.scale)
    job = DatasetJob(
        input_dir=args.input_dir,
        output_dir=args.output_dir,
        config=cfg,
        master_seed=args.seed,
        variants=args.variants,
        workers=args.workers,
        patches_per_item=args.patches,
        sharpness_threshold=args.min_sharpness,
    )
    summary = generate_pairs(job)
    _print_summary(summary)
    if summary["processed"] == 0:
        log.warning("no images were processed")
    return 0


def cmd_testset(args) -> int:
    cfg = load_config(args.config, scale=4)
    summary = make_testset(
        args.kind, args.input_dir, args.output_dir, args.seed,
        config=cfg, workers=args.workers,
    )
    _print_summary(summary)
    return 0


def _psnr_pairs(ref: Path, dist: Path):
    if ref.is_file():
        yield ref.stem, ref, dist
        return
    dist_by_stem = {p.stem: p for p in dist.iterdir() if p.is_file()}
    for p in sorted(ref.iterdir()):
        if p.is_file() and p.stem in dist_by_stem:
            yield p.stem, p, dist_by_stem[p.stem]


def cmd_psnr(args) -> int:
    ref, dist = Path(args.ref), Path(args.dist)
    values = []
    for stem, rpath, dpath in _psnr_pairs(ref, dist):
        val = psnr_y(read_image(rpath), read_image(dpath))
        values.append(val)
        print(f"{stem}: {val:.4f} dB" if math.isfinite(val) else f"{stem}: inf dB")
    if not values:
        raise JobError("no matching image pairs")
    finite = [v for v in values if math.isfinite(v)]
    mean = sum(finite) / len(finite) if finite else math.inf
    print(f"mean: {mean:.4f} dB" if math.isfinite(mean) else "mean: inf dB")
    return 0


def cmd_replay(args) -> int:
    manifest = Manifest.from_json(Path(args.manifest).read_text())
    hr = read_image(args.hr)
    crop = manifest.input
    if crop.get("height") and crop.get("width"):
        if hr.shape[0] < crop["height"] or hr.shape[1] < crop["width"]:
            raise JobError(
                f"HR {hr.shape[:2]} smaller than manifest input "
                f"{(crop['height'], crop['width'])}"
            )
        top = (hr.shape[0] - crop["height"]) // 2
        left = (hr.shape[1] - crop["width"]) // 2
        hr = hr[top : top + crop["height"], left : left + crop["width"]]
    if args.pool is None:
        pool = resolve_pool(pool=None)
    else:
        from .isp import load_pool

        pool = load_pool(args.pool)
    result = execute_plan(hr, manifest.plan, pool)
    Path(args.out).write_bytes(result.lr_bytes)
    if args.out_npy:
        write_npy_f32(args.out_npy, result.lr)
    print(f"wrote {args.out} ({result.lr_format}, {result.lr.shape[1]}x{result.lr.shape[0]})")
    return 0


def cmd_preview(args) -> int:
    cfg = load_config(args.config, args.scale)
    hr = read_image(args.input_path)
    hr = center_crop_divisible(hr, 4 * cfg.scale)
    result = degrade(hr, cfg, args.seed, path=args.input_path)
    up = resize(result.lr, hr.shape[0], hr.shape[1], "nearest", antialias=False)
    gap = np.ones((hr.shape[0], 8, 3))
    sheet = np.concatenate([hr, gap, np.clip(up, 0, 1)], axis=1)
    out = args.out or str(Path(args.input_path).with_suffix("")) + "_preview.png"
    write_png(out, sheet)
    order = [
        f"{op.slot}{'' if op.stage is None else f'.{op.stage}'}"
        for op in result.manifest.plan.ops
        if op.applied
    ]
    print("applied:", " -> ".join(order), "-> final_jpeg"
          if result.manifest.plan.final_jpeg else "")
    print(f"wrote {out}")
    return 0


def cmd_degrade(args) -> int:
    cfg = load_config(args.config, args.scale)
    hr = read_image(args.hr)
    hr = center_crop_divisible(hr, 4 * cfg.scale)
    result = degrade(hr, cfg, args.seed, variant=args.variant, path=args.hr)
    if args.out_lr:
        Path(args.out_lr).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out_lr).write_bytes(result.lr_bytes)
    if args.out_npy:
        write_npy_f32(args.out_npy, result.lr)
    if args.out_manifest:
        Path(args.out_manifest).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out_manifest).write_text(result.manifest.to_json())
    if not (args.out_lr or args.out_npy or args.out_manifest):
        print(result.manifest.to_json())
    return 0


def cmd_plan(args) -> int:
    cfg = load_config(args.config, args.scale)
    rng = make_generator(args.seed)
    plan = sample_plan(cfg, rng, resolve_pool(cfg))
    text = json.dumps(plan.to_dict(), sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_convert(args) -> int:
    img = read_image(args.input_path)
    out = Path(args.output_path)
    if out.suffix.lower() == ".npy":
        write_npy_f32(out, img)
    elif out.suffix.lower() == ".png":
        write_png(out, img)
    else:
        raise JobError(f"unsupported output format {out.suffix!r}")
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "testset": cmd_testset,
    "psnr": cmd_psnr,
    "replay": cmd_replay,
    "preview": cmd_preview,
    "degrade": cmd_degrade,
    "plan": cmd_plan,
    "convert": cmd_convert,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DEGRADE_FORGE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (JobError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
