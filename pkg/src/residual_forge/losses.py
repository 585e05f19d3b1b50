"""Two-part objective: soft feasibility constraint plus gradient matching.

The constraint term is the total absolute out-of-range mass of the
residual, sum |clamp(R, a, b) - R|. The gradient term compares stacked
Sobel fields of the composite and the target; the canonical form is the
mean of squared differences over all 6*H*W elements ("mse" mode), which is
smooth everywhere and resolution-independent. An unsquared Euclidean-norm
mode over the same stacked field ("euclidean") is kept for comparison; its
minimizers coincide with the canonical form.

Because the gradient operator annihilates spatial constants,
gradient_loss(x + c, x) == 0 for any constant c: a composite may sit
brighter than its target while preserving every local contrast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .combiner import CombinerParams
from .errors import InvalidBoundsError, InvalidConfigError
from .images import require_same_shape
from .sobel import _backward_xy, _forward_xy

GRAD_MODE_MSE = "mse"
GRAD_MODE_EUCLIDEAN = "euclidean"
_GRAD_MODES = (GRAD_MODE_MSE, GRAD_MODE_EUCLIDEAN)


def _require_bounds(a: float, b: float) -> None:
    if not a < b:
        raise InvalidBoundsError(f"bounds must satisfy a < b, got a={a}, b={b}")


@dataclass(frozen=True)
class LossWeights:
    """Weights and feasibility bounds for the total objective.

    Defaults (1, 1) make the total a plain unweighted sum of the two terms;
    bounds default to the displayable residual range [0, 1].
    """
    lambda_const: float = 1.0
    lambda_grad: float = 1.0
    bound_low: float = 0.0
    bound_high: float = 1.0
    grad_mode: str = GRAD_MODE_MSE

    def __post_init__(self):
        _require_bounds(self.bound_low, self.bound_high)
        if self.lambda_const < 0 or self.lambda_grad < 0:
            raise InvalidConfigError("loss weights must be nonnegative")
        if self.lambda_const == 0 and self.lambda_grad == 0:
            raise InvalidConfigError("at least one loss weight must be positive")
        if self.grad_mode not in _GRAD_MODES:
            raise InvalidConfigError(
                f"grad_mode must be one of {_GRAD_MODES}, got {self.grad_mode!r}")


@dataclass(frozen=True)
class LossBreakdown:
    """Scalar total plus its unweighted constraint and gradient components."""
    total: float
    constraint_term: float
    gradient_term: float


def constraint_loss(residual: np.ndarray, a: float = 0.0, b: float = 1.0) -> float:
    """Total absolute out-of-range mass: sum |clamp(R, a, b) - R|."""
    _require_bounds(a, b)
    return float(np.abs(np.clip(residual, a, b) - residual).sum())


def constraint_loss_grad(residual: np.ndarray, a: float = 0.0,
                         b: float = 1.0) -> np.ndarray:
    """Subgradient of constraint_loss: +1 above b, -1 below a, 0 inside."""
    _require_bounds(a, b)
    return np.sign(residual - np.clip(residual, a, b))


def _diff_xy(output, target, target_field):
    """Difference of gradient fields as an (dx, dy) pair of (H, W, 3) arrays.

    target_field may be a stacked (6, H, W) field from sobel_forward or an
    (gx, gy) pair; None computes it from the target.
    """
    require_same_shape(output, target, ("output", "target"))
    if target_field is None:
        tfx, tfy = _forward_xy(target)
    elif isinstance(target_field, tuple):
        tfx, tfy = target_field
    else:
        tfx = np.moveaxis(target_field[0:3], 0, 2)
        tfy = np.moveaxis(target_field[3:6], 0, 2)
    dx, dy = _forward_xy(output)
    np.subtract(dx, tfx, out=dx)
    np.subtract(dy, tfy, out=dy)
    return dx, dy


def _term_and_grad_xy(dx, dy, mode):
    n = 2 * dx.size  # all six planes
    sq = float(np.vdot(dx, dx) + np.vdot(dy, dy))
    if mode == GRAD_MODE_MSE:
        return sq / n, lambda: (2.0 / n) * _backward_xy(dx, dy)
    if mode == GRAD_MODE_EUCLIDEAN:
        term = float(np.sqrt(sq))
        if term == 0.0:
            return 0.0, lambda: np.zeros_like(dx)
        return term, lambda: _backward_xy(dx, dy) / term
    raise InvalidConfigError(f"unknown gradient-loss mode {mode!r}")


def gradient_loss(output: np.ndarray, target: np.ndarray,
                  mode: str = GRAD_MODE_MSE) -> float:
    """Stacked-gradient discrepancy between two images.

    "mse": mean of squared differences over all 6*H*W field elements.
    "euclidean": unsquared Euclidean norm of the stacked difference field.
    """
    dx, dy = _diff_xy(output, target, None)
    term, _ = _term_and_grad_xy(dx, dy, mode)
    return term


def gradient_loss_grad(output: np.ndarray, target: np.ndarray,
                       mode: str = GRAD_MODE_MSE) -> np.ndarray:
    """Gradient of gradient_loss with respect to the output image."""
    dx, dy = _diff_xy(output, target, None)
    _, grad = _term_and_grad_xy(dx, dy, mode)
    return grad()


def total_loss(input_img: np.ndarray, residual: np.ndarray, target: np.ndarray,
               params: CombinerParams, weights: LossWeights) -> LossBreakdown:
    """Weighted sum of constraint and gradient terms (terms kept unweighted)."""
    breakdown, _ = total_loss_and_grad(input_img, residual, target, params,
                                       weights)
    return breakdown


def total_loss_grad(input_img: np.ndarray, residual: np.ndarray,
                    target: np.ndarray, params: CombinerParams,
                    weights: LossWeights) -> np.ndarray:
    """Gradient of the total loss with respect to the residual."""
    _, grad = total_loss_and_grad(input_img, residual, target, params, weights)
    return grad


def total_loss_and_grad(
    input_img: np.ndarray,
    residual: np.ndarray,
    target: np.ndarray,
    params: CombinerParams,
    weights: LossWeights,
    target_field=None,
) -> tuple[LossBreakdown, np.ndarray]:
    """Fused loss + gradient evaluation (the optimizer's hot path).

    target_field may carry a precomputed sobel_forward(target) so iterative
    callers avoid recomputing it every step.
    """
    require_same_shape(input_img, target, ("input", "target"))
    require_same_shape(input_img, residual, ("input", "residual"))
    a, b = weights.bound_low, weights.bound_high
    alpha = params.alpha

    blend = (1.0 - alpha) * residual
    if alpha != 0.0:
        blend += alpha * input_img
    output = np.clip(blend, 0.0, 1.0)
    pass_mask = (blend >= 0.0) & (blend <= 1.0)

    dx, dy = _diff_xy(output, target, target_field)
    gradient_term, grad_fn = _term_and_grad_xy(dx, dy, weights.grad_mode)

    # sign(R - clamp(R)) is the constraint subgradient; reuse the violation
    # buffer for its absolute mass.
    violation = residual - np.clip(residual, a, b)
    constraint_term = float(np.abs(violation).sum())

    total = (weights.lambda_const * constraint_term
             + weights.lambda_grad * gradient_term)

    grad = grad_fn()
    grad *= pass_mask
    grad *= weights.lambda_grad * (1.0 - alpha)
    if weights.lambda_const != 0.0:
        grad += weights.lambda_const * np.sign(violation)
    return LossBreakdown(total, constraint_term, gradient_term), grad
