import json
import math
import os
import subprocess

import numpy as np
import pytest

import turbsim


def test_calibration_matches_flir_values():
    t_h, t_v = turbsim.real_world_shift(50.0, 25.0, 100.0)
    assert t_h == pytest.approx(0.4576, abs=1e-4)
    assert t_v == pytest.approx(0.4621, abs=1e-4)
    assert turbsim.gamma_for_shift(t_h, 25.0, 100.0) == pytest.approx(50.0, rel=1e-9)
    assert turbsim.mean_pixel_shift(150.0, 25.0) == pytest.approx(10.6066, abs=1e-4)
    report = turbsim.calibrate(100.0)
    assert set(report) == {"sigma_z", "mu_l", "t_h_m", "t_v_m", "depth_m"}
    assert report["t_h_m"] == pytest.approx(0.9153, abs=1e-4)


def test_simulate_identity_and_determinism():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(48, 64), dtype=np.uint8)
    out, du, dv = turbsim.simulate_turbulence(img, gamma=0.0, sigma_b2=0.0)
    assert np.array_equal(out, img)
    assert du.shape == (48, 64) and not du.any()

    a = turbsim.simulate_turbulence(img, gamma=50.0, seed=3)
    b = turbsim.simulate_turbulence(img, gamma=50.0, seed=3)
    assert np.array_equal(a[0], b[0])
    assert a[0].dtype == np.uint8


def test_rgb_and_16_bit_round_trip_dtypes():
    rgb = np.full((20, 30, 3), 77, dtype=np.uint8)
    out, _, _ = turbsim.simulate_turbulence(rgb, gamma=100.0)
    assert out.shape == rgb.shape and np.array_equal(out, rgb)  # constant image is a fixed point
    deep = np.arange(600, dtype=np.uint16).reshape(20, 30) * 100
    out16 = turbsim.blur_image(deep, 1.0)
    assert out16.dtype == np.uint16


def test_warp_unit_shift():
    img = np.arange(50, dtype=np.uint8).reshape(5, 10)
    du = np.ones((5, 10))
    dv = np.zeros((5, 10))
    out = turbsim.warp_image(img, du, dv)
    assert np.array_equal(out[:, :-1], img[:, 1:])
    assert np.array_equal(out[:, -1], img[:, -1])


def test_field_statistics():
    du, dv = turbsim.distortion_field(640, 512, 50.0, 25.0, seed=1)
    interior = du[20:-20:32, 20:-20:32]
    assert interior.std() == pytest.approx(50.0 / math.sqrt(100.0 * math.pi), rel=0.2)
    report = turbsim.validate_model(25.0, fields=50)
    assert report["pass"]["all"]


def test_seed_hash():
    assert turbsim.fnv1a64(b"") == 0xCBF29CE484222325
    assert turbsim.derive_seed(0, "img_000.png", 1) == 0x625A2C75C015BC7B


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        turbsim.component_variance(1.0, 0.0)
    with pytest.raises(turbsim.LoadError):
        turbsim.load_manifest(str(tmp_path / "missing.json"))


def test_cli_in_process_and_binary():
    code, out, _ = turbsim.cli_main(["calibrate", "--gamma", "150", "--depth-m", "100"])
    assert code == 0
    assert json.loads(out)["t_h_m"] == pytest.approx(1.3729, abs=1e-4)
    assert turbsim.cli_main(["calibrate", "--depth-m", "0"])[0] == 2

    exe = os.environ.get("TURBSIM_CLI")
    if exe:
        proc = subprocess.run([exe, "calibrate", "--gamma", "25"], capture_output=True, text=True, check=True)
        assert json.loads(proc.stdout)["t_h_m"] == pytest.approx(0.2288, abs=1e-4)


def test_augment_dataset(tmp_path):
    import zlib
    import struct

    def write_gray_png(path, arr):
        raw = b"".join(b"\x00" + row.tobytes() for row in arr)
        def chunk(tag, data):
            c = struct.pack(">I", len(data)) + tag + data
            return c + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
        h, w = arr.shape
        png = b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
        png += chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b"")
        path.write_bytes(png)

    src = tmp_path / "in"
    src.mkdir()
    rng = np.random.default_rng(1)
    images = []
    for i in range(3):
        write_gray_png(src / f"f{i}.png", rng.integers(0, 256, size=(24, 32), dtype=np.uint8))
        images.append({"id": i + 1, "file_name": f"f{i}.png", "width": 32, "height": 24})
    manifest = {
        "images": images,
        "annotations": [{"id": 1, "image_id": 2, "category_id": 1, "bbox": [1, 1, 4, 4]}],
        "categories": [{"id": 1, "name": "car"}],
    }
    (tmp_path / "m.json").write_text(json.dumps(manifest))
    out = turbsim.augment_dataset(str(tmp_path / "m.json"), str(src), str(tmp_path / "out"), gammas=[25.0, 50.0])
    assert len(out["images"]) == 6
    assert (tmp_path / "out" / "g50" / "f2.png").exists()
    assert out["images"][0]["turbulence"]["seed"] == turbsim.derive_seed(0, "f0.png", 0)
    assert turbsim.load_manifest(str(tmp_path / "out" / "manifest.json")) == out
