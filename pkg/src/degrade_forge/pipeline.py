"""Random-shuffle degradation plans: sampling, execution, and manifests.

A plan is a fully materialized, ordered list of operator descriptors: a
uniform random permutation of the six slots {blur_iso, blur_aniso,
downsample, noise_gaussian, noise_jpeg, noise_sensor}, each slot gated by
its probability but kept in the plan with an `applied` flag, plus an
unconditional final JPEG encode that writes the LR image. When the sampled
downsampler is down_up, its two resize stages may occupy independent
positions so other degradations land between them.

Executing the same plan on the same image is bit-reproducible: stochastic
operators carry their own recorded substream keys.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blur_kernels import BlurSpec, sample_blur_spec
from .config import DegradationConfig
from .degradations import (
    DownSpec,
    GaussianNoiseSpec,
    add_gaussian_noise,
    apply_blur,
    down_up_stage_sizes,
    downsample,
    nearest_preblur_range,
    sample_gaussian_noise_spec,
)
from .fileio import png_bytes
from .image import as_image, clamp01
from .isp import (
    BAYER_PATTERNS,
    CalibrationPool,
    CameraParams,
    apply_sensor_noise,
    default_pool,
    load_pool,
    sample_camera_params,
)
from .jpeg import JpegSpec, decode_jpeg, encode_jpeg, jpeg_noise
from .resize import resize
from .rng import (
    RNG_ALGORITHM,
    draw_key,
    generator_from_key,
    image_generator,
    pixel_sha256,
)

PIPELINE_VERSION = "1.0.0"
MANIFEST_SCHEMA_VERSION = 1

SLOT_BLUR_ISO = "blur_iso"
SLOT_BLUR_ANISO = "blur_aniso"
SLOT_DOWNSAMPLE = "downsample"
SLOT_NOISE_GAUSSIAN = "noise_gaussian"
SLOT_NOISE_JPEG = "noise_jpeg"
SLOT_NOISE_SENSOR = "noise_sensor"
SLOTS = (
    SLOT_BLUR_ISO,
    SLOT_BLUR_ANISO,
    SLOT_DOWNSAMPLE,
    SLOT_NOISE_GAUSSIAN,
    SLOT_NOISE_JPEG,
    SLOT_NOISE_SENSOR,
)


@dataclass(frozen=True)
class SensorNoiseSpec:
    camera: CameraParams
    pattern: str
    pool_id: str

    def to_dict(self) -> dict:
        return {
            "camera": self.camera.to_dict(),
            "pattern": self.pattern,
            "pool_id": self.pool_id,
        }

    @staticmethod
    def from_dict(d: dict) -> "SensorNoiseSpec":
        return SensorNoiseSpec(
            camera=CameraParams.from_dict(d["camera"]),
            pattern=d["pattern"],
            pool_id=d["pool_id"],
        )


@dataclass(frozen=True)
class PlanOp:
    slot: str
    applied: bool
    spec: object = None
    rng_key: Optional[int] = None
    stage: Optional[int] = None  # down_up split stage (1 or 2)

    def to_dict(self) -> dict:
        d = {"slot": self.slot, "applied": self.applied}
        if self.spec is not None:
            d["spec"] = self.spec.to_dict()
        if self.rng_key is not None:
            d["rng_key"] = str(self.rng_key)  # string: survives JSON in any host
        if self.stage is not None:
            d["stage"] = self.stage
        return d

    @staticmethod
    def from_dict(d: dict) -> "PlanOp":
        slot = d["slot"]
        spec = d.get("spec")
        if spec is not None:
            if slot in (SLOT_BLUR_ISO, SLOT_BLUR_ANISO):
                spec = BlurSpec.from_dict(spec)
            elif slot == SLOT_DOWNSAMPLE:
                spec = DownSpec.from_dict(spec)
            elif slot == SLOT_NOISE_GAUSSIAN:
                spec = GaussianNoiseSpec.from_dict(spec)
            elif slot == SLOT_NOISE_JPEG:
                spec = JpegSpec.from_dict(spec)
            elif slot == SLOT_NOISE_SENSOR:
                spec = SensorNoiseSpec.from_dict(spec)
            else:
                raise ValueError(f"unknown plan slot {slot!r}")
        key = d.get("rng_key")
        return PlanOp(
            slot=slot,
            applied=bool(d["applied"]),
            spec=spec,
            rng_key=None if key is None else int(key),
            stage=d.get("stage"),
        )


@dataclass(frozen=True)
class DegradationPlan:
    scale: int  # net LR = HR / scale
    ops: tuple
    final_jpeg: Optional[JpegSpec]
    pre_scale: Optional[str] = None  # bilinear|bicubic half-size step (x4 branch)

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "pre_scale": self.pre_scale,
            "ops": [op.to_dict() for op in self.ops],
            "final_jpeg": None if self.final_jpeg is None else self.final_jpeg.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "DegradationPlan":
        fj = d.get("final_jpeg")
        return DegradationPlan(
            scale=int(d["scale"]),
            pre_scale=d.get("pre_scale"),
            ops=tuple(PlanOp.from_dict(o) for o in d["ops"]),
            final_jpeg=None if fj is None else JpegSpec.from_dict(fj),
        )


@dataclass
class Manifest:
    """Provenance record: replaying it on the same HR pixels reproduces the
    LR output bit-exactly."""

    plan: DegradationPlan
    input: dict
    output: dict
    config_sha256: Optional[str] = None
    seed: Optional[dict] = None
    schema_version: int = MANIFEST_SCHEMA_VERSION
    pipeline_version: str = PIPELINE_VERSION
    rng_algorithm: str = RNG_ALGORITHM

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "pipeline_version": self.pipeline_version,
            "rng_algorithm": self.rng_algorithm,
            "input": self.input,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "plan": self.plan.to_dict(),
            "output": self.output,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @staticmethod
    def from_dict(d: dict) -> "Manifest":
        version = d.get("schema_version")
        if version != MANIFEST_SCHEMA_VERSION:
            raise ValueError(
                f"manifest schema version {version!r} unsupported, "
                f"this build reads version {MANIFEST_SCHEMA_VERSION}"
            )
        return Manifest(
            plan=DegradationPlan.from_dict(d["plan"]),
            input=d.get("input", {}),
            output=d.get("output", {}),
            config_sha256=d.get("config_sha256"),
            seed=d.get("seed"),
            schema_version=version,
            pipeline_version=d.get("pipeline_version", PIPELINE_VERSION),
            rng_algorithm=d.get("rng_algorithm", RNG_ALGORITHM),
        )

    @staticmethod
    def from_json(text: str) -> "Manifest":
        return Manifest.from_dict(json.loads(text))


@dataclass
class PipelineResult:
    lr: np.ndarray
    manifest: Manifest
    lr_bytes: bytes  # the exact encoded LR payload (JPEG, or PNG when bypassed)
    lr_format: str  # "jpeg" | "png"


def resolve_pool(config: Optional[DegradationConfig] = None,
                 pool: Optional[CalibrationPool] = None) -> CalibrationPool:
    if pool is not None:
        return pool
    if config is not None and config.pool_path:
        return load_pool(config.pool_path)
    return default_pool()


def _sample_downsample(config: DegradationConfig, scale: int,
                       rng: np.random.Generator) -> DownSpec:
    methods = config.downsample_methods
    method = methods[int(rng.integers(0, len(methods)))]
    if method == "nearest":
        lo, hi = nearest_preblur_range(scale)
        return DownSpec(method=method, scale=scale, pre_blur_sigma=float(rng.uniform(lo, hi)))
    if method == "down_up":
        a = float(rng.uniform(0.5, scale))
        stage1 = ("bilinear", "bicubic")[int(rng.integers(0, 2))]
        stage2 = ("bilinear", "bicubic")[int(rng.integers(0, 2))]
        return DownSpec(method=method, scale=scale, a=a,
                        stage1_method=stage1, stage2_method=stage2)
    return DownSpec(method=method, scale=scale)


def sample_plan(config: DegradationConfig, rng: np.random.Generator,
                pool: Optional[CalibrationPool] = None) -> DegradationPlan:
    """Draw one fully concrete plan.

    Draw order is frozen (permutation; prescale; blur specs; downsampler;
    Gaussian noise; inner JPEG; sensor noise; split placement; final
    quality), so a given generator state always yields the same plan.
    Gated-off slots keep their sampled specs with applied=False.
    """
    pool = resolve_pool(config, pool)
    order = [SLOTS[i] for i in rng.permutation(len(SLOTS))]

    pre_scale = None
    scale = config.scale
    if config.scale == 4 and rng.random() < config.prescale_prob:
        pre_scale = ("bilinear", "bicubic")[int(rng.integers(0, 2))]
        scale = 2

    specs = {}
    applied = {}
    specs[SLOT_BLUR_ISO] = sample_blur_spec(scale, "iso", rng)
    applied[SLOT_BLUR_ISO] = config.use_blur_iso
    specs[SLOT_BLUR_ANISO] = sample_blur_spec(scale, "aniso", rng)
    applied[SLOT_BLUR_ANISO] = config.use_blur_aniso
    specs[SLOT_DOWNSAMPLE] = _sample_downsample(config, scale, rng)
    applied[SLOT_DOWNSAMPLE] = True

    specs[SLOT_NOISE_GAUSSIAN] = sample_gaussian_noise_spec(
        rng, config.gaussian_mode_probs, config.gaussian_sigma_levels
    )
    applied[SLOT_NOISE_GAUSSIAN] = config.use_gaussian_noise
    gaussian_key = draw_key(rng)

    applied[SLOT_NOISE_JPEG] = (
        config.use_jpeg_inner and rng.random() < config.jpeg_inner_prob
    )
    specs[SLOT_NOISE_JPEG] = JpegSpec(
        quality=int(rng.integers(config.jpeg_quality_range[0],
                                 config.jpeg_quality_range[1] + 1))
    )

    applied[SLOT_NOISE_SENSOR] = (
        config.use_sensor_noise and rng.random() < config.sensor_noise_prob
    )
    if config.bayer_pattern == "random":
        pattern = BAYER_PATTERNS[int(rng.integers(0, len(BAYER_PATTERNS)))]
    else:
        pattern = config.bayer_pattern
    camera = sample_camera_params(
        pool, rng, config.shot_noise_range, config.read_noise_model
    )
    specs[SLOT_NOISE_SENSOR] = SensorNoiseSpec(
        camera=camera, pattern=pattern, pool_id=pool.pool_id
    )
    sensor_key = draw_key(rng)

    keys = {SLOT_NOISE_GAUSSIAN: gaussian_key, SLOT_NOISE_SENSOR: sensor_key}
    ops = [
        PlanOp(slot=s, applied=applied[s], spec=specs[s], rng_key=keys.get(s))
        for s in order
    ]

    down_spec = specs[SLOT_DOWNSAMPLE]
    if down_spec.method == "down_up" and rng.random() < config.down_up_split_prob:
        pos = next(i for i, op in enumerate(ops) if op.slot == SLOT_DOWNSAMPLE)
        ops[pos] = PlanOp(slot=SLOT_DOWNSAMPLE, applied=True, spec=down_spec, stage=1)
        insert_at = int(rng.integers(pos + 1, len(ops) + 1))
        ops.insert(
            insert_at,
            PlanOp(slot=SLOT_DOWNSAMPLE, applied=True, spec=down_spec, stage=2),
        )

    final_jpeg = None
    if config.use_final_jpeg:
        final_jpeg = JpegSpec(
            quality=int(rng.integers(config.jpeg_quality_range[0],
                                     config.jpeg_quality_range[1] + 1))
        )
    return DegradationPlan(
        scale=config.scale, ops=tuple(ops), final_jpeg=final_jpeg, pre_scale=pre_scale
    )


def execute_plan(hr: np.ndarray, plan: DegradationPlan,
                 pool: Optional[CalibrationPool] = None) -> PipelineResult:
    """Run a plan and return the LR image, its encoded bytes, and a manifest."""
    img = as_image(hr)
    in_h, in_w = img.shape[:2]
    if in_h % plan.scale or in_w % plan.scale:
        raise ValueError(
            f"{in_h}x{in_w} not divisible by scale {plan.scale}; crop first"
        )
    input_record = {
        "pixel_sha256": pixel_sha256(img),
        "height": in_h,
        "width": in_w,
    }

    if plan.pre_scale is not None:
        img = resize(img, in_h // 2, in_w // 2, plan.pre_scale, antialias=True)

    pending_target = None
    for op in plan.ops:
        if not op.applied:
            continue
        if op.slot in (SLOT_BLUR_ISO, SLOT_BLUR_ANISO):
            img = apply_blur(img, op.spec)
        elif op.slot == SLOT_DOWNSAMPLE:
            if op.stage == 1:
                mid, pending_target = down_up_stage_sizes(
                    img.shape[0], img.shape[1], op.spec
                )
                img = resize(img, mid[0], mid[1], op.spec.stage1_method, antialias=True)
            elif op.stage == 2:
                if pending_target is None:
                    raise ValueError("down_up stage 2 appears before stage 1")
                img = resize(img, pending_target[0], pending_target[1],
                             op.spec.stage2_method, antialias=True)
                pending_target = None
            else:
                img = downsample(img, op.spec)
        elif op.slot == SLOT_NOISE_GAUSSIAN:
            img = add_gaussian_noise(img, op.spec, generator_from_key(op.rng_key))
        elif op.slot == SLOT_NOISE_JPEG:
            img = jpeg_noise(img, op.spec)
        elif op.slot == SLOT_NOISE_SENSOR:
            active_pool = resolve_pool(None, pool)
            if op.spec.pool_id != active_pool.pool_id:
                raise ValueError(
                    f"plan was sampled with calibration pool {op.spec.pool_id[:12]} "
                    f"but pool {active_pool.pool_id[:12]} is loaded"
                )
            img = apply_sensor_noise(
                img,
                op.spec.camera,
                active_pool,
                generator_from_key(op.rng_key),
                op.spec.pattern,
            )
        else:
            raise ValueError(f"unknown plan slot {op.slot!r}")
    if pending_target is not None:
        raise ValueError("down_up stage 1 has no matching stage 2")

    img = clamp01(img)
    if plan.final_jpeg is not None:
        lr_bytes = encode_jpeg(img, plan.final_jpeg.quality)
        lr = decode_jpeg(lr_bytes)
        lr_format = "jpeg"
    else:
        lr = img
        lr_bytes = png_bytes(lr)
        lr_format = "png"

    expected = (in_h // plan.scale, in_w // plan.scale)
    if lr.shape[:2] != expected:
        raise AssertionError(
            f"size law violated: got {lr.shape[:2]}, expected {expected}"
        )
    manifest = Manifest(
        plan=plan,
        input=input_record,
        output={"height": lr.shape[0], "width": lr.shape[1], "format": lr_format},
    )
    return PipelineResult(lr=lr, manifest=manifest, lr_bytes=lr_bytes, lr_format=lr_format)


def classic_plan(kind: str, scale: int, kernel: Optional[BlurSpec] = None,
                 sigma: Optional[float] = None, noise_key: int = 0) -> DegradationPlan:
    """The two classical special cases.

    "bicubic": a single antialiased bicubic downscale, losslessly stored.
    "traditional": blur with the given kernel, direct s-strided subsampling,
    then channel-independent white Gaussian noise of level `sigma`.
    """
    if kind == "bicubic":
        ops = (PlanOp(SLOT_DOWNSAMPLE, True, DownSpec(method="bicubic", scale=scale)),)
        return DegradationPlan(scale=scale, ops=ops, final_jpeg=None)
    if kind == "traditional":
        blur = kernel if kernel is not None else BlurSpec(kind="iso", size=7, sigma=0.1)
        ops = (
            PlanOp(SLOT_BLUR_ISO if blur.kind == "iso" else SLOT_BLUR_ANISO, True, blur),
            PlanOp(SLOT_DOWNSAMPLE, True, DownSpec(method="stride", scale=scale)),
            PlanOp(
                SLOT_NOISE_GAUSSIAN,
                True,
                GaussianNoiseSpec(mode="channel_independent", sigma=float(sigma or 0.0)),
                rng_key=noise_key,
            ),
        )
        return DegradationPlan(scale=scale, ops=ops, final_jpeg=None)
    raise ValueError(f"unknown classic kind {kind!r}")


def degrade(hr: np.ndarray, config: DegradationConfig, seed: int,
            variant: int = 0, path: Optional[str] = None,
            pool: Optional[CalibrationPool] = None) -> PipelineResult:
    """Sample a plan from a per-image substream and execute it."""
    hr = as_image(hr)
    pool = resolve_pool(config, pool)
    rng = image_generator(seed, variant, hr)
    plan = sample_plan(config, rng, pool)
    result = execute_plan(hr, plan, pool)
    result.manifest.config_sha256 = config.digest()
    result.manifest.seed = {"master_seed": int(seed), "variant": int(variant)}
    if path is not None:
        result.manifest.input["path"] = str(path)
    return result


def replay(hr: np.ndarray, manifest: Manifest,
           pool: Optional[CalibrationPool] = None) -> PipelineResult:
    """Re-execute a manifest's plan. The document is trusted as-is; edited
    parameters simply produce a different LR."""
    return execute_plan(hr, manifest.plan, pool)
