"""Pipeline configuration with the published parameter defaults.

Every probability, range, and toggle the sampler consults lives here; a JSON
config file mirrors the field names and omitted keys keep their defaults.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

DEFAULT_SHARPNESS_THRESHOLD = 1.5e-4


@dataclass(frozen=True)
class DegradationConfig:
    scale: int = 4

    # operator-class toggles
    use_blur_iso: bool = True
    use_blur_aniso: bool = True
    use_gaussian_noise: bool = True
    use_jpeg_inner: bool = True
    use_sensor_noise: bool = True
    use_final_jpeg: bool = True

    # blur parameter ranges per net scale
    blur_sizes: tuple = (7, 9, 11, 13, 15, 17, 19, 21)
    iso_sigma_range_x2: tuple = (0.1, 2.4)
    iso_sigma_range_x4: tuple = (0.1, 2.8)
    aniso_axis_range_x2: tuple = (0.5, 6.0)
    aniso_axis_range_x4: tuple = (0.5, 8.0)

    # downsampling
    downsample_methods: tuple = ("nearest", "bilinear", "bicubic", "down_up")
    down_up_split_prob: float = 0.5

    # noise
    gaussian_mode_probs: tuple = (0.2, 0.4, 0.4)  # general, channel, gray
    gaussian_sigma_levels: int = 25
    jpeg_inner_prob: float = 0.75
    jpeg_quality_range: tuple = (30, 95)
    sensor_noise_prob: float = 0.25
    bayer_pattern: str = "RGGB"  # one of the four patterns, or "random"
    shot_noise_range: tuple = (1e-4, 1.2e-2)
    read_noise_model: tuple = (2.18, 1.20, 0.26)
    pool_path: str = ""  # empty -> built-in calibration pool

    # scale-4 branch: bilinear-or-bicubic x1/2 before a full x2 pipeline
    prescale_prob: float = 0.25

    def __post_init__(self):
        if self.scale not in (2, 4):
            raise ValueError(f"scale must be 2 or 4, got {self.scale}")
        for name in (
            "down_up_split_prob",
            "jpeg_inner_prob",
            "sensor_noise_prob",
            "prescale_prob",
        ):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{name}={p} outside [0, 1]")
        probs = self.gaussian_mode_probs
        if len(probs) != 3 or any(p < 0 for p in probs) or abs(sum(probs) - 1) > 1e-9:
            raise ValueError(f"gaussian_mode_probs {probs} must sum to 1")
        if not self.downsample_methods:
            raise ValueError("downsample_methods must be non-empty")
        for name in (
            "iso_sigma_range_x2",
            "iso_sigma_range_x4",
            "aniso_axis_range_x2",
            "aniso_axis_range_x4",
            "jpeg_quality_range",
            "shot_noise_range",
        ):
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise ValueError(f"{name}=({lo}, {hi}) is not ordered")
        if self.bayer_pattern not in ("RGGB", "BGGR", "GRBG", "GBRG", "random"):
            raise ValueError(f"bad bayer_pattern {self.bayer_pattern!r}")

    def iso_sigma_range(self, scale: int) -> tuple:
        return self.iso_sigma_range_x2 if scale == 2 else self.iso_sigma_range_x4

    def aniso_axis_range(self, scale: int) -> tuple:
        return self.aniso_axis_range_x2 if scale == 2 else self.aniso_axis_range_x4

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, val in d.items():
            if isinstance(val, tuple):
                d[key] = list(val)
        return d

    @staticmethod
    def from_dict(d: dict) -> "DegradationConfig":
        known = {f.name for f in fields(DegradationConfig)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {
            k: tuple(v) if isinstance(v, list) else v for k, v in d.items()
        }
        return DegradationConfig(**kwargs)

    @staticmethod
    def from_json(text: str) -> "DegradationConfig":
        return DegradationConfig.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()


def load_config(path=None, scale=None) -> DegradationConfig:
    """Config from a JSON file (or defaults), with an optional scale override."""
    if path:
        with open(path) as fh:
            cfg = DegradationConfig.from_dict(json.load(fh))
    else:
        cfg = DegradationConfig()
    if scale is not None and scale != cfg.scale:
        d = cfg.to_dict()
        d["scale"] = scale
        cfg = DegradationConfig.from_dict(d)
    return cfg
