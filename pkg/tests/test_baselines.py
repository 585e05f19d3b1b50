import numpy as np
import pytest

from residual_forge import (
    BaselineKind,
    CombinerParams,
    DegenerateAlphaError,
    InvalidConfigError,
    OptimizerConfig,
    combine,
    global_normalize,
    heuristic_residual,
    normalized_distance_loss,
    staypositive_optimize,
)
from residual_forge.corpus import day2night_pair


def test_global_normalize_spans_unit():
    x = np.array([0.2, 0.6, 1.0])
    assert np.allclose(global_normalize(x), [0.0, 0.5, 1.0])


def test_global_normalize_constant_convention():
    assert np.all(global_normalize(np.full((4, 4, 3), 0.37)) == 0.5)


def test_global_normalize_identity_when_already_spanning():
    x = np.array([0.0, 0.25, 1.0])
    assert np.allclose(global_normalize(x), x, atol=1e-15)


def test_global_normalize_output_range(rng):
    x = rng.uniform(-3, 5, (6, 6, 3))
    n = global_normalize(x)
    assert abs(n.min()) < 1e-12
    assert abs(n.max() - 1.0) < 1e-12


def test_normalized_loss_affine_invariant(rng):
    out = rng.random((8, 8, 3))
    p = rng.random((8, 8, 3))
    base = normalized_distance_loss(out, p)
    scaled = normalized_distance_loss(out, 2.0 * p + 0.1)
    assert abs(base - scaled) < 1e-10


def test_heuristic_clamps_infeasible_solve():
    i = np.full((3, 3, 3), 0.4)
    p = np.full((3, 3, 3), 0.8)
    r = heuristic_residual(i, p, CombinerParams(0.5))
    # (0.8 - 0.2) / 0.5 = 1.2, clamped to 1
    assert np.all(r == 1.0)


def test_heuristic_exact_when_feasible(rng):
    i = rng.uniform(0.2, 0.8, (8, 8, 3))
    r_true = rng.uniform(0.1, 0.9, (8, 8, 3))
    params = CombinerParams(0.5)
    p = combine(i, r_true, params)
    r = heuristic_residual(i, p, params)
    assert np.allclose(combine(i, r, params), p, atol=1e-12)


def test_heuristic_cannot_subtract_light():
    i = np.ones((3, 3, 3))
    p = np.zeros((3, 3, 3))
    params = CombinerParams(0.5)
    r = heuristic_residual(i, p, params)
    assert np.all(r == 0.0)
    assert np.all(combine(i, r, params) == 0.5)


def test_heuristic_degenerate_alpha():
    with pytest.raises(DegenerateAlphaError):
        heuristic_residual(np.zeros((3, 3, 3)), np.zeros((3, 3, 3)),
                           CombinerParams(1.0))


def test_staypositive_rejects_heuristic_kind(rng):
    i = rng.random((8, 8, 3))
    with pytest.raises(InvalidConfigError):
        staypositive_optimize(i, i, CombinerParams(0.5), BaselineKind.HEURISTIC,
                              OptimizerConfig(iterations=5))


def test_staypositive_already_matched(rng):
    i = rng.random((12, 12, 3))
    p = np.clip(0.5 * i, 0, 1)
    params = CombinerParams(0.5)
    cfg = OptimizerConfig(iterations=100, combiner=params)
    _, output, trace = staypositive_optimize(i, p, params,
                                             BaselineKind.SP_ALLPIXELS, cfg)
    assert trace.samples[0][1].total < 1e-20
    assert trace.samples[-1][1].total < 1e-10


def test_staypositive_degenerate_constants():
    i = np.full((8, 8, 3), 0.5)
    p = np.full((8, 8, 3), 0.25)
    params = CombinerParams(0.5)
    cfg = OptimizerConfig(iterations=20, combiner=params)
    for kind in (BaselineKind.SP_ALLPIXELS, BaselineKind.SP_2PARAM):
        _, output, trace = staypositive_optimize(i, p, params, kind, cfg)
        assert np.isfinite(trace.samples[-1][1].total)


def test_staypositive_allpixels_improves_on_day2night(rng):
    i, p = day2night_pair(rng, 32)
    params = CombinerParams(0.5)
    cfg = OptimizerConfig(iterations=300, combiner=params)
    _, _, trace = staypositive_optimize(i, p, params,
                                        BaselineKind.SP_ALLPIXELS, cfg)
    assert trace.samples[-1][1].gradient_term < trace.samples[0][1].gradient_term


def test_staypositive_two_param_runs_and_improves(rng):
    i = rng.uniform(0.3, 0.9, (16, 16, 3))
    r_true = np.clip(0.8 * rng.random((16, 16, 3)) + 0.1, 0, 1)
    params = CombinerParams(0.5)
    p = combine(i, r_true, params)
    cfg = OptimizerConfig(iterations=200, combiner=params)
    residual, output, trace = staypositive_optimize(i, p, params,
                                                    BaselineKind.SP_2PARAM, cfg)
    assert residual.shape == i.shape
    assert output.min() >= 0.0 and output.max() <= 1.0
    assert trace.samples[-1][1].total <= trace.samples[0][1].total


def test_staypositive_returns_raw_residual_and_clamped_output(rng):
    i = rng.random((10, 10, 3))
    p = rng.random((10, 10, 3))
    params = CombinerParams(0.5)
    cfg = OptimizerConfig(iterations=50, combiner=params)
    residual, output, _ = staypositive_optimize(i, p, params,
                                                BaselineKind.SP_ALLPIXELS, cfg)
    assert np.array_equal(output,
                          combine(i, np.clip(residual, 0, 1), params))
