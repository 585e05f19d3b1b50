"""Comparison methods: algebraic heuristic and global-normalization optimizers.

The heuristic inverts the combiner equation directly and hard-clips the
result into [0, 1]; it is exact whenever the unclipped solve is feasible
and fails precisely where light would have to be subtracted (bright input,
dark target).

The global-normalization methods minimize the squared distance between
min/max-normalized composite and target plus the soft feasibility
constraint, either over two global parameters (gain/offset on the target)
or over every residual pixel.
"""

from __future__ import annotations

import enum

import numpy as np

from .combiner import CombinerParams, combine, combine_backward, combine_with_mask
from .errors import DegenerateAlphaError, InvalidConfigError
from .images import require_image, require_same_shape
from .losses import LossBreakdown, constraint_loss, constraint_loss_grad
from .optimizer import OptimizerConfig, OptimizationTrace, minimize

_DEGENERATE_RANGE = 1e-9
_TWO_PARAM_FD_EPS = 1e-4


class BaselineKind(enum.Enum):
    HEURISTIC = "heuristic"
    SP_2PARAM = "staypositive_2param"
    SP_ALLPIXELS = "staypositive_allpixels"


def global_normalize(img: np.ndarray) -> np.ndarray:
    """(x - min) / (max - min) over all pixels and channels jointly.

    A constant image (range below 1e-9) maps to all 0.5 by convention.
    """
    lo = float(img.min())
    hi = float(img.max())
    if hi - lo < _DEGENERATE_RANGE:
        return np.full_like(img, 0.5)
    return (img - lo) / (hi - lo)


def normalized_distance_loss(output: np.ndarray, target: np.ndarray) -> float:
    """Mean squared distance between globally normalized images."""
    require_same_shape(output, target, ("output", "target"))
    d = global_normalize(output) - global_normalize(target)
    return float(np.mean(d * d))


def heuristic_residual(input_img: np.ndarray, target: np.ndarray,
                       params: CombinerParams) -> np.ndarray:
    """Clipped algebraic solve R = clamp((P - alpha*I) / (1 - alpha), 0, 1)."""
    require_same_shape(input_img, target, ("input", "target"))
    if params.alpha >= 1.0:
        raise DegenerateAlphaError("alpha=1 leaves no residual contribution to solve for")
    raw = (target - params.alpha * input_img) / (1.0 - params.alpha)
    return np.clip(raw, 0.0, 1.0)


def _normalize_with_scale(img: np.ndarray) -> tuple[np.ndarray, float]:
    # Scale is d(normalized)/d(pixel) with the extremes held fixed.
    lo = float(img.min())
    hi = float(img.max())
    if hi - lo < _DEGENERATE_RANGE:
        return np.full_like(img, 0.5), 0.0
    return (img - lo) / (hi - lo), 1.0 / (hi - lo)


def staypositive_optimize(
    input_img: np.ndarray,
    target: np.ndarray,
    params: CombinerParams,
    kind: BaselineKind,
    config: OptimizerConfig,
) -> tuple[np.ndarray, np.ndarray, OptimizationTrace]:
    """Run a global-normalization baseline.

    Returns (raw residual image, composite from the clamped residual, trace).
    For the two-parameter variant the residual is gain*target + offset with
    gain initialized to 1 and offset to 0; gradients for the two parameters
    come from central finite differences. For the all-pixels variant every
    residual pixel is a zero-initialized parameter with analytic gradients
    (normalization extremes treated as constants per step).

    In the trace, the normalized-distance term occupies the gradient_term
    slot of each LossBreakdown.
    """
    require_image(input_img, "input")
    require_image(target, "target")
    require_same_shape(input_img, target, ("input", "target"))
    if kind == BaselineKind.SP_ALLPIXELS:
        return _sp_all_pixels(input_img, target, params, config)
    if kind == BaselineKind.SP_2PARAM:
        return _sp_two_param(input_img, target, params, config)
    raise InvalidConfigError(f"{kind} is not a StayPositive-style variant")


def _sp_all_pixels(input_img, target, params, config):
    w = config.weights
    norm_target = global_normalize(target)

    def loss_and_grad(residual):
        output, mask = combine_with_mask(input_img, residual, params)
        norm_out, scale = _normalize_with_scale(output)
        d = norm_out - norm_target
        sim = float(np.mean(d * d))
        cterm = constraint_loss(residual, w.bound_low, w.bound_high)
        total = w.lambda_grad * sim + w.lambda_const * cterm
        g_out = (2.0 / d.size) * d * scale
        grad = (w.lambda_grad * combine_backward(g_out, mask, params)
                + w.lambda_const * constraint_loss_grad(residual, w.bound_low,
                                                        w.bound_high))
        return LossBreakdown(total, cterm, sim), grad

    residual0 = np.zeros_like(input_img)
    residual, _final, trace = minimize(residual0, loss_and_grad, config)
    realized = np.clip(residual, w.bound_low, w.bound_high)
    output = combine(input_img, realized, params)
    return residual, output, trace


def _sp_two_param(input_img, target, params, config):
    w = config.weights
    norm_target = global_normalize(target)

    def loss_at(theta) -> LossBreakdown:
        raw = theta[0] * target + theta[1]
        realized = np.clip(raw, w.bound_low, w.bound_high)
        output = combine(input_img, realized, params)
        d = global_normalize(output) - norm_target
        sim = float(np.mean(d * d))
        cterm = constraint_loss(raw, w.bound_low, w.bound_high)
        total = w.lambda_grad * sim + w.lambda_const * cterm
        return LossBreakdown(total, cterm, sim)

    def loss_and_grad(theta):
        breakdown = loss_at(theta)
        grad = np.zeros(2)
        for i in range(2):
            plus = theta.copy()
            minus = theta.copy()
            plus[i] += _TWO_PARAM_FD_EPS
            minus[i] -= _TWO_PARAM_FD_EPS
            grad[i] = (loss_at(plus).total - loss_at(minus).total) \
                / (2.0 * _TWO_PARAM_FD_EPS)
        return breakdown, grad

    theta0 = np.array([1.0, 0.0])
    theta, _final, trace = minimize(theta0, loss_and_grad, config)
    raw = theta[0] * target + theta[1]
    realized = np.clip(raw, w.bound_low, w.bound_high)
    output = combine(input_img, realized, params)
    return raw, output, trace
