"""Optical combiner model: O = clip(alpha*I + (1-alpha)*R) and its adjoint.

alpha is the device's transmittance of the real scene; the residual R is
the light the display adds. The clip keeps the composite physically
producible. Gradients use a subgradient convention where values exactly at
0 or 1 still pass through (mask 1 on the closed interval, 0 strictly
outside).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .images import clip_pass_mask, require_same_shape


@dataclass(frozen=True)
class CombinerParams:
    """alpha in [0, 1]: weight of the real-world input in the blend."""
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidConfigError(
                f"alpha must be in [0, 1], got {self.alpha}")


def blend(input_img: np.ndarray, residual: np.ndarray,
          params: CombinerParams) -> np.ndarray:
    """Pre-clip linear blend alpha*I + (1-alpha)*R."""
    require_same_shape(input_img, residual, ("input", "residual"))
    a = params.alpha
    return a * input_img + (1.0 - a) * residual


def combine(input_img: np.ndarray, residual: np.ndarray,
            params: CombinerParams) -> np.ndarray:
    """Composite output clip(alpha*I + (1-alpha)*R), always in [0, 1]."""
    return np.clip(blend(input_img, residual, params), 0.0, 1.0)


def combine_with_mask(input_img: np.ndarray, residual: np.ndarray,
                      params: CombinerParams) -> tuple[np.ndarray, np.ndarray]:
    """Composite plus the clip pass-through mask needed for backprop."""
    pre = blend(input_img, residual, params)
    return np.clip(pre, 0.0, 1.0), clip_pass_mask(pre)


def combine_backward(upstream: np.ndarray, pass_mask: np.ndarray,
                     params: CombinerParams) -> np.ndarray:
    """Gradient of the composite w.r.t. the residual: (1-alpha)*upstream*mask."""
    require_same_shape(upstream, pass_mask, ("upstream", "clip mask"))
    return (1.0 - params.alpha) * upstream * pass_mask
