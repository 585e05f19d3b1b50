"""Physically feasible additive-light residual synthesis for optical
see-through displays.

Given a real-world input image I and a desired target P, optimize a
per-pixel residual R so the optical composite clip(alpha*I + (1-alpha)*R)
matches P in gradient space, and benchmark against heuristic and
global-normalization baselines with patch-averaged PSNR/SSIM reporting.
"""

__version__ = "0.1.0"

from .baselines import (BaselineKind, global_normalize, heuristic_residual,
                        normalized_distance_loss, staypositive_optimize)
from .combiner import CombinerParams, combine, combine_backward, combine_with_mask
from .corpus import make_synthetic_corpus
from .errors import (DegenerateAlphaError, ImageTooSmallError,
                     InvalidBoundsError, InvalidConfigError,
                     PatchTooSmallError, ResidualForgeError,
                     ShapeMismatchError, UnsupportedFormatError)
from .images import (PatchGrid, clip_pass_mask, clip_unit, load_image,
                     quantize_unit, save_image, tile_patches)
from .losses import (LossBreakdown, LossWeights, constraint_loss,
                     constraint_loss_grad, gradient_loss, gradient_loss_grad,
                     total_loss, total_loss_and_grad, total_loss_grad)
from .metrics import MetricsReport, PatchScore, patch_metrics, psnr, ssim
from .optimizer import (InfeasibilityStats, OptimizationTrace, OptimizerConfig,
                        optimize_residual, realized_residual)
from .sobel import KERNEL_X, KERNEL_Y, sobel_backward, sobel_forward

__all__ = [
    "BaselineKind", "CombinerParams", "DegenerateAlphaError",
    "ImageTooSmallError", "InfeasibilityStats", "InvalidBoundsError",
    "InvalidConfigError", "KERNEL_X", "KERNEL_Y", "LossBreakdown",
    "LossWeights", "MetricsReport", "OptimizationTrace", "OptimizerConfig",
    "PatchGrid", "PatchScore", "PatchTooSmallError", "ResidualForgeError",
    "ShapeMismatchError", "UnsupportedFormatError", "clip_pass_mask",
    "clip_unit", "combine", "combine_backward", "combine_with_mask",
    "constraint_loss", "constraint_loss_grad", "global_normalize",
    "gradient_loss", "gradient_loss_grad", "heuristic_residual", "load_image",
    "make_synthetic_corpus", "normalized_distance_loss", "optimize_residual",
    "patch_metrics", "psnr", "quantize_unit", "realized_residual",
    "save_image", "sobel_backward", "sobel_forward", "ssim",
    "staypositive_optimize", "tile_patches", "total_loss",
    "total_loss_and_grad", "total_loss_grad",
]
