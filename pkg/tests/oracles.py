"""Independent brute-force reference implementations used only by tests.

These deliberately avoid the library's vectorized/separable shortcuts:
plain loops, direct formulas, clamped indexing. They are the oracles the
fast paths are checked against.
"""

import math

import numpy as np

SOBEL_X = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]


def sobel_reference(img):
    """Direct 3x3 cross-correlation with replicate borders, (6, H, W)."""
    h, w, _ = img.shape
    out = np.zeros((6, h, w))
    for c in range(3):
        for i in range(h):
            for j in range(w):
                sx = 0.0
                sy = 0.0
                for u in range(3):
                    for v in range(3):
                        ii = min(max(i + u - 1, 0), h - 1)
                        jj = min(max(j + v - 1, 0), w - 1)
                        sx += SOBEL_X[u][v] * img[ii, jj, c]
                        sy += SOBEL_X[v][u] * img[ii, jj, c]
                out[c, i, j] = sx
                out[3 + c, i, j] = sy
    return out


def central_difference(scalar_fn, x, eps=1e-5):
    """Per-element central finite differences of a scalar function."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        plus = x.copy()
        minus = x.copy()
        plus[idx] += eps
        minus[idx] -= eps
        grad[idx] = (scalar_fn(plus) - scalar_fn(minus)) / (2.0 * eps)
    return grad


def _gaussian_window(size=11, sigma=1.5):
    half = (size - 1) / 2.0
    w = np.zeros((size, size))
    for u in range(size):
        for v in range(size):
            w[u, v] = math.exp(-(((u - half) ** 2) + ((v - half) ** 2))
                               / (2.0 * sigma ** 2))
    return w / w.sum()


def ssim_reference(a, b, size=11, sigma=1.5, c1=0.01 ** 2, c2=0.03 ** 2):
    """Direct per-window SSIM over valid positions, channels averaged."""
    h, w, _ = a.shape
    window = _gaussian_window(size, sigma)
    channel_means = []
    for c in range(3):
        values = []
        for i in range(h - size + 1):
            for j in range(w - size + 1):
                pa = a[i:i + size, j:j + size, c]
                pb = b[i:i + size, j:j + size, c]
                mu_a = float((window * pa).sum())
                mu_b = float((window * pb).sum())
                var_a = float((window * pa * pa).sum()) - mu_a ** 2
                var_b = float((window * pb * pb).sum()) - mu_b ** 2
                cov = float((window * pa * pb).sum()) - mu_a * mu_b
                num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
                den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
                values.append(num / den)
        channel_means.append(float(np.mean(values)))
    return float(np.mean(channel_means))
