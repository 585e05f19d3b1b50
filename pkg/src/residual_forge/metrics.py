"""PSNR and SSIM with patch-averaged reporting.

PSNR is 10*log10(1 / MSE) over all elements of [0, 1]-range images, capped
at 99.0 dB (zero MSE returns the cap; per-patch reports mark capped
values). SSIM uses an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
C2 = 0.03^2, computed per channel over valid (non-padded) window positions
and averaged across channels. LPIPS is never computed here; reports carry
it only as an externally supplied value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ImageTooSmallError
from .images import require_same_shape, tile_patches

PSNR_CAP_DB = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_SSIM_C1 = 0.01 ** 2
_SSIM_C2 = 0.03 ** 2

PROVENANCE_NOTE = (
    "SSIM: 11x11 Gaussian window sigma=1.5, per-channel maps over valid "
    "positions averaged across channels; PSNR capped at 99 dB; patches are "
    "non-overlapping top-left tiles with remainders merged into the last "
    "tile; LPIPS is externally supplied when present, never computed here."
)


def _mse(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return float(np.mean(d * d))


def _psnr_from_mse(mse: float) -> tuple[float, bool]:
    if mse == 0.0:
        return PSNR_CAP_DB, True
    value = 10.0 * math.log10(1.0 / mse)
    if value >= PSNR_CAP_DB:
        return PSNR_CAP_DB, True
    return value, False


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1]-range images."""
    require_same_shape(a, b, ("a", "b"))
    return _psnr_from_mse(_mse(a, b))[0]


def _gaussian_window_1d() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - (SSIM_WINDOW - 1) / 2.0
    k = np.exp(-(offsets ** 2) / (2.0 * SSIM_SIGMA ** 2))
    return k / k.sum()


_WINDOW_1D = _gaussian_window_1d()


def _window_mean(plane: np.ndarray) -> np.ndarray:
    # Separable Gaussian-weighted mean over valid 11x11 windows.
    rows = np.lib.stride_tricks.sliding_window_view(plane, SSIM_WINDOW, axis=0)
    out = rows @ _WINDOW_1D
    cols = np.lib.stride_tricks.sliding_window_view(out, SSIM_WINDOW, axis=1)
    return cols @ _WINDOW_1D


def _ssim_channel(x: np.ndarray, y: np.ndarray) -> float:
    mu_x = _window_mean(x)
    mu_y = _window_mean(y)
    var_x = _window_mean(x * x) - mu_x * mu_x
    var_y = _window_mean(y * y) - mu_y * mu_y
    cov = _window_mean(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (var_x + var_y + _SSIM_C2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity over valid window positions, channels averaged."""
    require_same_shape(a, b, ("a", "b"))
    h, w = a.shape[:2]
    if min(h, w) < SSIM_WINDOW:
        raise ImageTooSmallError(
            f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}")
    per_channel = [_ssim_channel(a[:, :, c], b[:, :, c]) for c in range(3)]
    return float(np.mean(per_channel))


@dataclass(frozen=True)
class PatchScore:
    row: int
    col: int
    height: int
    width: int
    psnr: float
    ssim: float
    psnr_capped: bool

    def to_dict(self) -> dict:
        return {"row": self.row, "col": self.col, "height": self.height,
                "width": self.width, "psnr": self.psnr, "ssim": self.ssim,
                "psnr_capped": self.psnr_capped}


@dataclass
class MetricsReport:
    """Per-patch and aggregate quality scores for one method."""
    method: str
    patch_size: int
    per_patch: list[PatchScore]
    mean_psnr: float
    mean_ssim: float
    lpips: float | None = None  # externally computed only
    note: str = field(default=PROVENANCE_NOTE)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "patch_size": self.patch_size,
            "psnr": self.mean_psnr,
            "ssim": self.mean_ssim,
            "lpips": self.lpips if self.lpips is not None else "external",
            "per_patch": [p.to_dict() for p in self.per_patch],
            "note": self.note,
        }


def patch_metrics(a: np.ndarray, b: np.ndarray, patch_size: int,
                  method: str = "") -> MetricsReport:
    """PSNR/SSIM per non-overlapping patch, aggregated by arithmetic mean."""
    require_same_shape(a, b, ("a", "b"))
    grid = tile_patches(a.shape[0], a.shape[1], patch_size)
    scores = []
    for row, col, h, w in grid.patches:
        pa = a[row:row + h, col:col + w]
        pb = b[row:row + h, col:col + w]
        value, capped = _psnr_from_mse(_mse(pa, pb))
        scores.append(PatchScore(row=row, col=col, height=h, width=w,
                                 psnr=value, ssim=ssim(pa, pb),
                                 psnr_capped=capped))
    return MetricsReport(
        method=method,
        patch_size=patch_size,
        per_patch=scores,
        mean_psnr=float(np.mean([s.psnr for s in scores])),
        mean_ssim=float(np.mean([s.ssim for s in scores])),
    )
