"""3x3 gradient operator with replicate padding, plus its exact adjoint.

The forward pass cross-correlates each channel with

    KERNEL_X = [[-1, 0, 1],          KERNEL_Y = KERNEL_X.T
                [-2, 0, 2],
                [-1, 0, 1]]

after replicating the border pixel once, so the output keeps the input's
spatial size. No normalization factor is applied. Responses are stacked
into a (6, H, W) field ordered (R_x, G_x, B_x, R_y, G_y, B_y); a spatially
constant image maps to the zero field.

The backward pass is the algebraic transpose of the forward pass,
including the replicate-padding fold, so <forward(u), v> == <u, backward(v)>
up to float rounding.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError
from .images import require_image

KERNEL_X = np.array([[-1.0, 0.0, 1.0],
                     [-2.0, 0.0, 2.0],
                     [-1.0, 0.0, 1.0]])
KERNEL_Y = KERNEL_X.T.copy()

GRADIENT_PLANES = 6


def _replicate_pad(img: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    pad = np.empty((h + 2, w + 2, 3), dtype=np.float64)
    pad[1:-1, 1:-1] = img
    pad[0, 1:-1] = img[0]
    pad[-1, 1:-1] = img[-1]
    pad[:, 0] = pad[:, 1]
    pad[:, -1] = pad[:, -2]
    return pad


def _forward_xy(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel x/y responses as two (H, W, 3) arrays."""
    pad = _replicate_pad(img)
    # Separable form: smooth [1,2,1] along one axis, difference [-1,0,1]
    # along the other.
    smooth_rows = pad[:-2] + 2.0 * pad[1:-1] + pad[2:]          # (H, W+2, 3)
    gx = smooth_rows[:, 2:] - smooth_rows[:, :-2]               # (H, W, 3)
    smooth_cols = pad[:, :-2] + 2.0 * pad[:, 1:-1] + pad[:, 2:]  # (H+2, W, 3)
    gy = smooth_cols[2:] - smooth_cols[:-2]                     # (H, W, 3)
    return gx, gy


def _backward_xy(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Adjoint of _forward_xy, including the replicate-padding fold."""
    h, w = gx.shape[:2]
    gpad = np.zeros((h + 2, w + 2, 3), dtype=np.float64)

    # Transpose of the horizontal difference, then of the vertical smooth.
    gsy = np.zeros((h, w + 2, 3), dtype=np.float64)
    gsy[:, 2:] += gx
    gsy[:, :w] -= gx
    gpad[:-2] += gsy
    gpad[1:-1] += 2.0 * gsy
    gpad[2:] += gsy

    # Same chain for the y direction.
    gsx = np.zeros((h + 2, w, 3), dtype=np.float64)
    gsx[2:] += gy
    gsx[:h] -= gy
    gpad[:, :-2] += gsx
    gpad[:, 1:-1] += 2.0 * gsx
    gpad[:, 2:] += gsx

    # Fold the replicate-padding contributions back onto the edge pixels.
    gpad[1, :] += gpad[0, :]
    gpad[h, :] += gpad[h + 1, :]
    gpad[:, 1] += gpad[:, 0]
    gpad[:, w] += gpad[:, w + 1]
    return gpad[1:h + 1, 1:w + 1].copy()


def sobel_forward(img: np.ndarray) -> np.ndarray:
    """Stacked x/y gradient responses of an (H, W, 3) image, shape (6, H, W)."""
    require_image(img)
    h, w = img.shape[:2]
    gx, gy = _forward_xy(img)
    out = np.empty((GRADIENT_PLANES, h, w), dtype=np.float64)
    out[0:3] = np.moveaxis(gx, 2, 0)
    out[3:6] = np.moveaxis(gy, 2, 0)
    return out


def sobel_backward(field: np.ndarray) -> np.ndarray:
    """Adjoint of sobel_forward: (6, H, W) upstream -> (H, W, 3) image grad."""
    if not isinstance(field, np.ndarray) or field.ndim != 3 \
            or field.shape[0] != GRADIENT_PLANES:
        raise ShapeMismatchError(
            f"expected a (6, H, W) gradient field, got shape "
            f"{getattr(field, 'shape', None)}")
    gx = np.moveaxis(field[0:3], 0, 2)
    gy = np.moveaxis(field[3:6], 0, 2)
    return _backward_xy(np.ascontiguousarray(gx), np.ascontiguousarray(gy))
