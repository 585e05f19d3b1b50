import numpy as np
import pytest

from residual_forge import (
    CombinerParams,
    InvalidConfigError,
    combine,
    heuristic_residual,
    load_image,
    make_synthetic_corpus,
    psnr,
)
from residual_forge.corpus import day2night_pair, feasible_pair, ramp_pair


def read_all(pairs):
    return [(load_image(a), load_image(b)) for a, b in pairs]


def test_same_seed_bitwise_identical(tmp_path):
    p1 = make_synthetic_corpus("feasible", 2, 32, 7, tmp_path / "a")
    p2 = make_synthetic_corpus("feasible", 2, 32, 7, tmp_path / "b")
    for (a1, b1), (a2, b2) in zip(p1, p2):
        assert open(a1, "rb").read() == open(a2, "rb").read()
        assert open(b1, "rb").read() == open(b2, "rb").read()


def test_different_seed_differs(tmp_path):
    p1 = make_synthetic_corpus("day2night", 1, 32, 1, tmp_path / "a")
    p2 = make_synthetic_corpus("day2night", 1, 32, 2, tmp_path / "b")
    assert open(p1[0][0], "rb").read() != open(p2[0][0], "rb").read()


def test_feasible_heuristic_recovers(tmp_path):
    pairs = make_synthetic_corpus("feasible", 3, 48, 11, tmp_path, alpha=0.5)
    params = CombinerParams(0.5)
    for input_img, target in read_all(pairs):
        r = heuristic_residual(input_img, target, params)
        assert psnr(combine(input_img, r, params), target) >= 40.0


def test_day2night_darkens(tmp_path):
    pairs = make_synthetic_corpus("day2night", 3, 48, 3, tmp_path)
    for input_img, target in read_all(pairs):
        assert target.mean() < input_img.mean()


def test_ramp_kind_writes_ramps(tmp_path):
    pairs = make_synthetic_corpus("ramp", 2, 32, 5, tmp_path)
    input_img, target = read_all(pairs)[0]
    assert np.all(input_img == input_img[0, 0, 0])
    # even index: left-to-right ramp, rows identical
    assert np.allclose(target[0], target[-1], atol=1e-12)
    assert target[0, -1, 0] > target[0, 0, 0]


def test_generators_stay_in_range(rng):
    for maker in (lambda: feasible_pair(rng, 32, 0.5)[:2],
                  lambda: day2night_pair(rng, 32),
                  lambda: ramp_pair(rng, 32, 0)):
        a, b = maker()
        for img in (a, b):
            assert img.shape == (32, 32, 3)
            assert img.min() >= 0.0 and img.max() <= 1.0


def test_validation_errors(tmp_path):
    with pytest.raises(InvalidConfigError):
        make_synthetic_corpus("nope", 1, 32, 0, tmp_path)
    with pytest.raises(InvalidConfigError):
        make_synthetic_corpus("ramp", 1, 16, 0, tmp_path)
    with pytest.raises(InvalidConfigError):
        make_synthetic_corpus("ramp", 0, 32, 0, tmp_path)
