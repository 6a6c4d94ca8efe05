import json

import numpy as np
import pytest

from degrade_forge.isp import (
    BAYER_PATTERNS,
    TONE_GRID,
    CalibrationPool,
    CameraParams,
    LINRGB_TO_XYZ_D50,
    add_raw_noise,
    apply_sensor_noise,
    builtin_pool,
    default_pool,
    demosaic_malvar,
    forward_isp,
    load_pool,
    mosaic,
    processed_sensor_noise,
    reverse_isp,
    sample_camera_params,
    save_pool,
    tone_apply,
    tone_invert,
)
from degrade_forge.metrics import psnr_y
from degrade_forge.rng import make_generator

from helpers import natural_image, reflect_index

# Gradient-corrected stencil coefficients, transcribed independently (x1/8).
_ORACLE_G_AT_RB = np.array([
    [0, 0, -1, 0, 0],
    [0, 0, 2, 0, 0],
    [-1, 2, 4, 2, -1],
    [0, 0, 2, 0, 0],
    [0, 0, -1, 0, 0],
]) / 8.0
_ORACLE_SAME_ROW = np.array([
    [0, 0, 0.5, 0, 0],
    [0, -1, 0, -1, 0],
    [-1, 4, 5, 4, -1],
    [0, -1, 0, -1, 0],
    [0, 0, 0.5, 0, 0],
]) / 8.0
_ORACLE_SAME_COL = _ORACLE_SAME_ROW.T
_ORACLE_OPPOSITE = np.array([
    [0, 0, -1.5, 0, 0],
    [0, 2, 0, 2, 0],
    [-1.5, 0, 6, 0, -1.5],
    [0, 2, 0, 2, 0],
    [0, 0, -1.5, 0, 0],
]) / 8.0

_SITE = {
    "RGGB": np.array([["R", "G"], ["G", "B"]]),
    "BGGR": np.array([["B", "G"], ["G", "R"]]),
    "GRBG": np.array([["G", "R"], ["B", "G"]]),
    "GBRG": np.array([["G", "B"], ["R", "G"]]),
}


def _stencil_at(raw, y, x, coeffs):
    h, w = raw.shape
    acc = 0.0
    for i in range(5):
        for j in range(5):
            yy = reflect_index(y + i - 2, h)
            xx = reflect_index(x + j - 2, w)
            acc += coeffs[i, j] * raw[yy, xx]
    return acc


def naive_malvar(raw, pattern):
    """Direct per-pixel stencil evaluation; the demosaic oracle."""
    h, w = raw.shape
    site = _SITE[pattern]
    out = np.zeros((h, w, 3))
    for y in range(h):
        for x in range(w):
            s = site[y % 2, x % 2]
            row_colors = set(site[y % 2])
            if s == "G":
                out[y, x, 1] = raw[y, x]
                for ci, color in ((0, "R"), (2, "B")):
                    same_row = color in row_colors
                    coeffs = _ORACLE_SAME_ROW if same_row else _ORACLE_SAME_COL
                    out[y, x, ci] = _stencil_at(raw, y, x, coeffs)
            else:
                own = 0 if s == "R" else 2
                other = 2 if s == "R" else 0
                out[y, x, own] = raw[y, x]
                out[y, x, 1] = _stencil_at(raw, y, x, _ORACLE_G_AT_RB)
                out[y, x, other] = _stencil_at(raw, y, x, _ORACLE_OPPOSITE)
    return out


def identity_like_pool():
    """Pool whose single entry has the no-op tone curve and the matrix that
    makes camera space coincide with linear sRGB."""
    entry = {
        "name": "identity",
        "forward_matrix_1": LINRGB_TO_XYZ_D50.copy(),
        "forward_matrix_2": LINRGB_TO_XYZ_D50.copy(),
        "tone_curve": TONE_GRID.copy(),
    }
    return CalibrationPool([entry])


def identity_cam(shot=0.0, read=0.0):
    return CameraParams(
        exposure_gain=1.0, red_gain=1.0, blue_gain=1.0,
        ccm=tuple(tuple(float(v) for v in row) for row in LINRGB_TO_XYZ_D50),
        ccm_weight=1.0, ccm_entry="identity", tone_curve_id="identity",
        shot_noise=shot, read_noise=read,
    )


class TestDemosaic:
    @pytest.mark.parametrize("pattern", BAYER_PATTERNS)
    def test_matches_stencil_oracle(self, pattern):
        rng = np.random.default_rng(3)
        raw = rng.random((12, 14))
        out = demosaic_malvar(raw, pattern)
        assert np.abs(out - naive_malvar(raw, pattern)).max() < 1e-12

    def test_impulse_at_green_site(self):
        # RGGB: (0,1) is the green in an R row; red around it follows the
        # same-row stencil response
        raw = np.zeros((12, 12))
        raw[5, 6] = 0.8  # odd row, even col is a G site in a B row for RGGB
        out = demosaic_malvar(raw, "RGGB")
        ref = naive_malvar(raw, "RGGB")
        assert np.abs(out - ref).max() < 1e-12

    def test_uniform_mosaic_reproduces_constant(self):
        raw = np.full((16, 16), 0.37)
        out = demosaic_malvar(raw, "RGGB")
        assert np.allclose(out, 0.37, atol=1e-12)

    def test_mosaic_demosaic_sites_pass_through(self):
        img = natural_image(16, 16, seed=9)
        raw = mosaic(img, "RGGB")
        out = demosaic_malvar(raw, "RGGB")
        # measured sites are untouched
        assert np.array_equal(out[0::2, 0::2, 0], img[0::2, 0::2, 0])
        assert np.array_equal(out[1::2, 1::2, 2], img[1::2, 1::2, 2])

    def test_odd_dims_rejected(self):
        with pytest.raises(ValueError, match="even"):
            demosaic_malvar(np.zeros((5, 6)))


class TestForwardReverse:
    def test_zero_raw_gives_zero_rgb(self):
        pool = default_pool()
        cam = sample_camera_params(pool, make_generator(0))
        out = forward_isp(np.zeros((16, 16)), cam, pool)
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_zero_image_gives_zero_raw(self):
        pool = default_pool()
        cam = sample_camera_params(pool, make_generator(0))
        raw = reverse_isp(np.zeros((16, 16, 3)), cam, pool)
        assert np.allclose(raw, 0.0, atol=1e-12)

    def test_uniform_raw_identity_params_flat_gray(self):
        pool = identity_like_pool()
        cam = identity_cam()
        out = forward_isp(np.full((16, 16), 0.25), cam, pool)
        interior = out[2:-2, 2:-2]
        assert np.abs(interior[:, :, 0] - interior[:, :, 1]).max() < 1e-3
        assert np.abs(interior[:, :, 2] - interior[:, :, 1]).max() < 1e-3
        assert interior.std() < 1e-6

    def test_roundtrip_psnr_on_corpus(self):
        pool = default_pool()
        rng = make_generator(21)
        for i in range(3):
            img = natural_image(128, 160, seed=50 + i)
            cam = sample_camera_params(pool, rng)
            out = apply_sensor_noise(img, cam, pool, make_generator(1),
                                     shot=0.0, read=0.0)
            sl = (slice(4, -4), slice(4, -4))
            assert psnr_y(img[sl], out[sl]) > 35.0
            assert np.abs(img[sl] - out[sl]).max() <= 0.1

    def test_tone_reverse_forward_identity(self):
        for entry in default_pool().entries:
            curve = entry["tone_curve"]
            y = np.linspace(0.0, 1.0, 4097)
            back = tone_apply(tone_invert(y, curve), curve)
            assert np.abs(back - y).max() < 1e-4

    def test_odd_input_rejected_by_reverse(self):
        pool = default_pool()
        cam = sample_camera_params(pool, make_generator(0))
        with pytest.raises(ValueError, match="even"):
            reverse_isp(np.zeros((15, 16, 3)), cam, pool)


class TestRawNoise:
    def test_zero_levels_identity(self):
        raw = np.random.default_rng(0).random((32, 32))
        out = add_raw_noise(raw, 0.0, 0.0, make_generator(1))
        assert np.array_equal(out, raw)

    def test_read_noise_variance(self):
        raw = np.full((1024, 1024), 0.5)
        read = 4e-4
        out = add_raw_noise(raw, 0.0, read, make_generator(2))
        emp = np.var(out - raw)
        assert abs(emp - read) < 0.03 * read

    def test_shot_noise_heteroscedastic(self):
        shot = 2e-3
        lo = np.full((1024, 512), 0.25)
        hi = np.full((1024, 512), 0.75)
        v_lo = np.var(add_raw_noise(lo, shot, 0.0, make_generator(3)) - lo)
        v_hi = np.var(add_raw_noise(hi, shot, 0.0, make_generator(4)) - hi)
        assert abs(v_hi / v_lo - 3.0) < 0.15  # 1:3 within 5%

    def test_negative_levels_rejected(self):
        with pytest.raises(ValueError):
            add_raw_noise(np.zeros((4, 4)), -1e-3, 0.0, make_generator(0))


class TestCameraSampling:
    def test_exposure_log_uniform(self):
        pool = default_pool()
        rng = make_generator(12)
        logs = [np.log2(sample_camera_params(pool, rng).exposure_gain)
                for _ in range(10_000)]
        assert abs(np.mean(logs) - 0.1) < 0.01
        assert min(logs) >= -0.1 and max(logs) <= 0.3

    def test_gain_ranges_and_noise_model(self):
        pool = default_pool()
        rng = make_generator(13)
        for _ in range(500):
            cam = sample_camera_params(pool, rng)
            assert 1.2 <= cam.red_gain <= 2.4
            assert 1.2 <= cam.blue_gain <= 2.4
            assert 1e-4 <= cam.shot_noise <= 1.2e-2
            assert cam.read_noise > 0

    def test_blend_endpoints(self):
        entry = default_pool().entries[0]
        fm1, fm2 = entry["forward_matrix_1"], entry["forward_matrix_2"]
        assert np.array_equal(1.0 * fm1 + 0.0 * fm2, fm1)
        assert np.array_equal(0.0 * fm1 + 1.0 * fm2, fm2)

    def test_fixed_seed_reproducible(self):
        pool = default_pool()
        a = sample_camera_params(pool, make_generator(14))
        b = sample_camera_params(pool, make_generator(14))
        assert a == b

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            CalibrationPool([])


class TestPool:
    def test_builtin_curves_valid(self):
        pool = builtin_pool()
        assert len(pool) >= 3
        for e in pool.entries:
            curve = e["tone_curve"]
            assert curve[0] == 0.0 and curve[-1] == 1.0
            assert np.all(np.diff(curve) > 0)

    def test_white_preservation(self):
        for e in builtin_pool().entries:
            for key in ("forward_matrix_1", "forward_matrix_2"):
                white = e[key] @ np.ones(3)
                assert np.allclose(white, [0.96422, 1.0, 0.82521], atol=1e-12)

    def test_save_load_roundtrip(self, tmp_path):
        pool = builtin_pool()
        path = tmp_path / "pool.json"
        save_pool(path, pool)
        loaded = load_pool(path)
        assert loaded.pool_id == pool.pool_id

    def test_load_rejects_bad_schema(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schema_version": 99, "entries": []}))
        with pytest.raises(ValueError, match="schema"):
            load_pool(path)

    def test_nonmonotone_curve_rejected(self):
        curve = TONE_GRID.copy()
        curve[500] = curve[499]  # plateau
        entry = {
            "name": "bad",
            "forward_matrix_1": LINRGB_TO_XYZ_D50,
            "forward_matrix_2": LINRGB_TO_XYZ_D50,
            "tone_curve": curve,
        }
        with pytest.raises(ValueError, match="increasing"):
            CalibrationPool([entry])


class TestProcessedSensorNoise:
    def test_zero_override_equals_bare_roundtrip(self):
        img = natural_image(64, 64, seed=30)
        pool = default_pool()
        auto = processed_sensor_noise(img, pool, make_generator(31), shot=0.0, read=0.0)
        cam = sample_camera_params(pool, make_generator(31))
        manual = apply_sensor_noise(img, cam, pool, make_generator(99),
                                    shot=0.0, read=0.0)
        assert np.array_equal(auto, manual)

    def test_flat_gray_default_sampling_statistics(self):
        img = np.full((512, 512, 3), 0.5)
        pool = default_pool()
        out = processed_sensor_noise(img, pool, make_generator(32))
        resid = (out - img).reshape(-1, 3)
        assert resid.std() > 0.0
        corr = np.corrcoef(resid.T)
        off = corr[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) > 0.1)  # demosaicing correlates channels
        assert abs(out.mean() - img.mean()) < 0.01

    def test_same_seed_bit_identical(self):
        img = natural_image(48, 48, seed=33)
        pool = default_pool()
        a = processed_sensor_noise(img, pool, make_generator(34))
        b = processed_sensor_noise(img, pool, make_generator(34))
        assert np.array_equal(a, b)

    def test_odd_size_pad_and_crop(self):
        img = natural_image(47, 45, seed=35)
        pool = default_pool()
        out = processed_sensor_noise(img, pool, make_generator(36), shot=0.0, read=0.0)
        assert out.shape == img.shape
