"""First-order optimization of the per-pixel residual.

The residual starts at zero and is updated with Adam (default) or plain
SGD on the total loss. Everything is deterministic: no randomized
initialization, no stochastic sampling, so identical inputs and config
give bitwise-identical results.

The returned residual is the raw optimized parameter and may sit slightly
outside the feasible bounds (the constraint is soft); the returned
composite is built from the hard-clamped residual, which is what a
physical display would actually emit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .combiner import CombinerParams, combine
from .errors import InvalidConfigError
from .images import require_image, require_same_shape
from .losses import LossBreakdown, LossWeights, total_loss_and_grad
from .sobel import _forward_xy

METHOD_ADAM = "adam"
METHOD_SGD = "sgd"
DECAY_COSINE = "cosine"
DECAY_NONE = "none"

CONVERGENCE_WINDOW = 50  # iterations over which loss improvement is measured


@dataclass(frozen=True)
class OptimizerConfig:
    iterations: int = 2000
    step_size: float = 0.05
    method: str = METHOD_ADAM
    adam_beta1: float = 0.9
    adam_beta2: float = 0.9
    adam_eps: float = 1e-8
    convergence_tol: float = 1e-7
    step_decay: str = DECAY_COSINE
    trace_every: int = 10
    weights: LossWeights = field(default_factory=LossWeights)
    combiner: CombinerParams = field(default_factory=lambda: CombinerParams(0.5))

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.step_size < 0:
            raise InvalidConfigError(f"step_size must be >= 0, got {self.step_size}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise InvalidConfigError("Adam betas must lie in [0, 1)")
        if self.method not in (METHOD_ADAM, METHOD_SGD):
            raise InvalidConfigError(f"unknown method {self.method!r}")
        if self.step_decay not in (DECAY_COSINE, DECAY_NONE):
            raise InvalidConfigError(f"unknown step_decay {self.step_decay!r}")
        if self.trace_every < 1:
            raise InvalidConfigError("trace_every must be >= 1")


@dataclass
class OptimizationTrace:
    """Subsampled per-iteration loss record plus the stop condition."""
    samples: list[tuple[int, LossBreakdown]]
    iterations_run: int
    stop_reason: str  # "budget" | "converged"


@dataclass(frozen=True)
class InfeasibilityStats:
    """How far outside [a, b] the raw residual sits."""
    constraint_mass: float
    max_violation: float


def _step_size_at(config: OptimizerConfig, t: int) -> float:
    if config.step_decay == DECAY_NONE or config.iterations == 1:
        return config.step_size
    frac = (t - 1) / (config.iterations - 1)
    return config.step_size * 0.5 * (1.0 + math.cos(math.pi * frac))


def minimize(theta0: np.ndarray,
             loss_and_grad: Callable[[np.ndarray], tuple[LossBreakdown, np.ndarray]],
             config: OptimizerConfig) -> tuple[np.ndarray, LossBreakdown,
                                               OptimizationTrace]:
    """Generic driver shared by the residual optimizer and the baselines.

    Stops on budget exhaustion, or early once the loss has settled at the
    best seen and neither the best nor the raw trend moved by more than
    convergence_tol (relative) over the trailing CONVERGENCE_WINDOW
    iterations.
    """
    theta = np.array(theta0, dtype=np.float64, copy=True)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    work = np.empty_like(theta)
    best_history: list[float] = []
    loss_history: list[float] = []
    samples: list[tuple[int, LossBreakdown]] = []
    stop_reason = "budget"
    iterations_run = config.iterations
    beta1, beta2 = config.adam_beta1, config.adam_beta2

    for t in range(1, config.iterations + 1):
        breakdown, grad = loss_and_grad(theta)
        if t == 1 or t % config.trace_every == 0:
            samples.append((t, breakdown))

        lr = _step_size_at(config, t)
        if config.method == METHOD_ADAM:
            # In-place moment updates; `work` is the only scratch buffer.
            np.subtract(grad, m, out=work)
            work *= 1.0 - beta1
            m += work
            np.multiply(grad, grad, out=work)
            work -= v
            work *= 1.0 - beta2
            v += work
            np.divide(v, 1.0 - beta2 ** t, out=work)
            np.sqrt(work, out=work)
            work += config.adam_eps
            np.divide(m, work, out=work)
            work *= lr / (1.0 - beta1 ** t)
            theta -= work
        else:
            np.multiply(grad, lr, out=work)
            theta -= work

        best = breakdown.total if not best_history else min(best_history[-1],
                                                            breakdown.total)
        best_history.append(best)
        loss_history.append(breakdown.total)
        # Converged means all of: the loss sits at the best seen, the best
        # has stopped improving over the window, and the raw loss trend over
        # the same window is flat. The last condition keeps the early
        # transient (loss recovering from a constraint blow-up) from
        # masquerading as stagnation.
        if t > CONVERGENCE_WINDOW and breakdown.total <= best * 1.01 + 1e-300:
            prev_best = best_history[t - 1 - CONVERGENCE_WINDOW]
            prev_loss = loss_history[t - 1 - CONVERGENCE_WINDOW]
            best_gain = (prev_best - best) / max(prev_best, 1e-300)
            trend = abs(prev_loss - breakdown.total) / max(prev_loss, 1e-300)
            if best_gain < config.convergence_tol and trend < config.convergence_tol:
                stop_reason = "converged"
                iterations_run = t
                break

    final_breakdown, _ = loss_and_grad(theta)
    samples.append((iterations_run, final_breakdown))
    trace = OptimizationTrace(samples=samples, iterations_run=iterations_run,
                              stop_reason=stop_reason)
    return theta, final_breakdown, trace


def optimize_residual(input_img: np.ndarray, target: np.ndarray,
                      config: OptimizerConfig) -> tuple[np.ndarray, np.ndarray,
                                                        OptimizationTrace]:
    """Optimize a zero-initialized residual so the composite matches the
    target in gradient space.

    Returns (raw residual, composite from the hard-clamped residual, trace).
    """
    require_image(input_img, "input")
    require_image(target, "target")
    require_same_shape(input_img, target, ("input", "target"))
    target_field = _forward_xy(target)  # pair form skips restacking per step

    def loss_and_grad(residual: np.ndarray):
        return total_loss_and_grad(input_img, residual, target, config.combiner,
                                   config.weights, target_field=target_field)

    residual0 = np.zeros_like(input_img)
    residual, _final, trace = minimize(residual0, loss_and_grad, config)
    realized, _stats = realized_residual(residual, config.weights)
    output = combine(input_img, realized, config.combiner)
    return residual, output, trace


def realized_residual(residual: np.ndarray,
                      weights: LossWeights) -> tuple[np.ndarray, InfeasibilityStats]:
    """Hard-clamp the raw residual into [a, b] and report the gap.

    The clamped image is what a display can actually emit; the stats
    surface how infeasible the soft-constrained parameter was.
    """
    clamped = np.clip(residual, weights.bound_low, weights.bound_high)
    violation = np.abs(clamped - residual)
    stats = InfeasibilityStats(constraint_mass=float(violation.sum()),
                               max_violation=float(violation.max()))
    return clamped, stats
