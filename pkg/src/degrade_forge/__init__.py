"""degrade-forge: a randomized blur/downsample/noise degradation pipeline
for synthesizing paired LR/HR super-resolution training data, with every
applied operation recorded in a replayable manifest."""

from .backend import BACKEND_NAME
from .blur_kernels import (
    BlurSpec,
    aniso_gaussian,
    iso_gaussian,
    sample_blur_spec,
    shifted_iso_gaussian,
)
from .config import DegradationConfig, load_config
from .degradations import (
    DownSpec,
    GaussianNoiseSpec,
    add_gaussian_noise,
    apply_blur,
    downsample,
    sample_general_covariance,
    sample_noise_specs,
)
from .image import filter2d_reflect, laplacian_variance, rgb_to_luma
from .isp import (
    CameraParams,
    add_raw_noise,
    default_pool,
    forward_isp,
    load_pool,
    processed_sensor_noise,
    reverse_isp,
    sample_camera_params,
)
from .jpeg import JpegSpec, jpeg_noise
from .metrics import psnr_y
from .pipeline import (
    DegradationPlan,
    Manifest,
    PipelineResult,
    classic_plan,
    degrade,
    execute_plan,
    replay,
    sample_plan,
)
from .resize import resize

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "BlurSpec",
    "CameraParams",
    "DegradationConfig",
    "DegradationPlan",
    "DownSpec",
    "GaussianNoiseSpec",
    "JpegSpec",
    "Manifest",
    "PipelineResult",
    "add_gaussian_noise",
    "add_raw_noise",
    "aniso_gaussian",
    "apply_blur",
    "classic_plan",
    "default_pool",
    "degrade",
    "downsample",
    "execute_plan",
    "filter2d_reflect",
    "forward_isp",
    "iso_gaussian",
    "jpeg_noise",
    "laplacian_variance",
    "load_config",
    "load_pool",
    "processed_sensor_noise",
    "psnr_y",
    "replay",
    "resize",
    "reverse_isp",
    "rgb_to_luma",
    "sample_blur_spec",
    "sample_camera_params",
    "sample_general_covariance",
    "sample_noise_specs",
    "sample_plan",
    "shifted_iso_gaussian",
    "__version__",
]
