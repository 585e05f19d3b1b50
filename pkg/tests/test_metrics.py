import numpy as np
import pytest

from residual_forge import (
    ImageTooSmallError,
    ShapeMismatchError,
    patch_metrics,
    psnr,
    ssim,
)

from oracles import ssim_reference


def test_psnr_identical_capped(rng):
    x = rng.random((16, 16, 3))
    assert psnr(x, x) == 99.0


def test_psnr_uniform_difference(rng):
    a = rng.uniform(0.0, 0.9, (32, 32, 3))
    b = a + 0.1
    assert abs(psnr(a, b) - 20.0) < 1e-9


def test_psnr_symmetry(rng):
    a = rng.random((16, 16, 3))
    b = rng.random((16, 16, 3))
    assert abs(psnr(a, b) - psnr(b, a)) < 1e-12


def test_psnr_monotone_in_noise(rng):
    base = rng.uniform(0.3, 0.7, (24, 24, 3))
    values = []
    for amp in (0.01, 0.05, 0.1):
        noisy = base + rng.uniform(-amp, amp, base.shape)
        values.append(psnr(base, noisy))
    assert values[0] > values[1] > values[2]


def test_psnr_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        psnr(np.zeros((4, 4, 3)), np.zeros((5, 4, 3)))


def test_ssim_identical_is_one(rng):
    x = rng.random((16, 16, 3))
    assert ssim(x, x) == 1.0


def test_ssim_identical_constants():
    x = np.full((16, 16, 3), 0.5)
    assert ssim(x, x) == 1.0


def test_ssim_range_and_symmetry(rng):
    a = rng.random((20, 20, 3))
    b = rng.random((20, 20, 3))
    v = ssim(a, b)
    assert -1.0 <= v <= 1.0
    assert abs(v - ssim(b, a)) < 1e-12


def test_ssim_minimum_size():
    with pytest.raises(ImageTooSmallError):
        ssim(np.zeros((10, 10, 3)), np.zeros((10, 10, 3)))


def test_ssim_matches_brute_force(rng):
    a = rng.random((24, 24, 3))
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
    assert abs(ssim(a, b) - ssim_reference(a, b)) < 1e-8


def test_patch_metrics_identical(rng):
    x = rng.random((300, 300, 3))
    report = patch_metrics(x, x, 150)
    assert len(report.per_patch) == 4
    assert all(s.psnr == 99.0 and s.psnr_capped for s in report.per_patch)
    assert all(s.ssim == 1.0 for s in report.per_patch)
    assert report.mean_psnr == 99.0
    assert report.mean_ssim == 1.0


def test_patch_metrics_single_patch_equals_whole(rng):
    a = rng.random((64, 64, 3))
    b = np.clip(a + 0.05 * rng.standard_normal(a.shape), 0, 1)
    report = patch_metrics(a, b, 150)
    assert len(report.per_patch) == 1
    assert report.mean_psnr == pytest.approx(psnr(a, b), abs=1e-12)
    assert report.mean_ssim == pytest.approx(ssim(a, b), abs=1e-12)


def test_patch_metrics_localized_difference(rng):
    a = rng.random((300, 300, 3))
    b = a.copy()
    b[:150, :150] = np.clip(b[:150, :150] + 0.2, 0, 1)
    report = patch_metrics(a, b, 150)
    untouched = [s for s in report.per_patch if s.psnr == 99.0 and s.ssim == 1.0]
    assert len(untouched) == 3


def test_patch_aggregate_is_arithmetic_mean(rng):
    a = rng.random((310, 150, 3))
    b = np.clip(a + 0.03 * rng.standard_normal(a.shape), 0, 1)
    report = patch_metrics(a, b, 150)
    assert report.mean_psnr == pytest.approx(
        float(np.mean([s.psnr for s in report.per_patch])), abs=1e-12)
    assert report.mean_ssim == pytest.approx(
        float(np.mean([s.ssim for s in report.per_patch])), abs=1e-12)


def test_uniform_degradation_patchwise_matches_whole(rng):
    from residual_forge.corpus import _layered_noise
    base = _layered_noise(rng, 300, 300, cells=(60, 30))
    a = np.repeat((0.2 + 0.6 * base)[:, :, None], 3, axis=2)
    b = a + 0.05
    report = patch_metrics(a, b, 150)
    assert abs(report.mean_psnr - psnr(a, b)) < 0.01
    assert abs(report.mean_ssim - ssim(a, b)) < 0.001


def test_report_serialization(rng):
    a = rng.random((32, 32, 3))
    report = patch_metrics(a, a, 150, method="identity")
    d = report.to_dict()
    assert d["method"] == "identity"
    assert d["psnr"] == 99.0
    assert d["ssim"] == 1.0
    assert d["lpips"] == "external"
    assert d["per_patch"][0]["psnr_capped"] is True
    assert "note" in d and d["note"]
