import json

import pytest

from degrade_forge.config import DegradationConfig, load_config


def test_defaults_match_published_parameters():
    cfg = DegradationConfig()
    assert cfg.scale == 4
    assert cfg.gaussian_mode_probs == (0.2, 0.4, 0.4)
    assert cfg.jpeg_inner_prob == 0.75
    assert cfg.sensor_noise_prob == 0.25
    assert cfg.prescale_prob == 0.25
    assert cfg.jpeg_quality_range == (30, 95)
    assert cfg.iso_sigma_range_x2 == (0.1, 2.4)
    assert cfg.iso_sigma_range_x4 == (0.1, 2.8)
    assert cfg.aniso_axis_range_x2 == (0.5, 6.0)
    assert cfg.aniso_axis_range_x4 == (0.5, 8.0)
    assert cfg.blur_sizes == (7, 9, 11, 13, 15, 17, 19, 21)
    assert cfg.gaussian_sigma_levels == 25


def test_json_roundtrip_and_digest_stability():
    cfg = DegradationConfig(scale=2, jpeg_inner_prob=0.5)
    again = DegradationConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_unknown_keys_rejected():
    with pytest.raises(ValueError, match="unknown config keys"):
        DegradationConfig.from_dict({"scale": 2, "sigma_levels": 10})


def test_invalid_values_rejected():
    with pytest.raises(ValueError):
        DegradationConfig(scale=3)
    with pytest.raises(ValueError):
        DegradationConfig(jpeg_inner_prob=1.5)
    with pytest.raises(ValueError):
        DegradationConfig(gaussian_mode_probs=(0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        DegradationConfig(downsample_methods=())
    with pytest.raises(ValueError):
        DegradationConfig(bayer_pattern="RGBG")


def test_load_config_with_partial_file_and_scale_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"jpeg_inner_prob": 0.5}))
    cfg = load_config(path, scale=2)
    assert cfg.jpeg_inner_prob == 0.5
    assert cfg.scale == 2
    assert cfg.sensor_noise_prob == 0.25  # untouched default
