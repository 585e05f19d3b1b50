"""Deterministic synthetic image pairs for benchmarking.

Three kinds:

* "feasible": the target is an exact combiner composite of the input with
  a known in-range residual, so the algebraic solve recovers it almost
  perfectly; these are exact-answer fixtures.
* "day2night": bright smooth input and a much darker, detail-rich target;
  large parts of the target demand subtracted light, which is the stress
  case for additive-only displays.
* "ramp": analytic gradient fixtures (flat input, linear-ramp target).

Pairs are generated from numpy's seeded Generator only, so the same seed
always produces bitwise-identical files.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidConfigError
from .images import save_image

CORPUS_KINDS = ("day2night", "feasible", "ramp")
MIN_CORPUS_SIZE = 32


def _smooth_noise(rng: np.random.Generator, h: int, w: int, cell: int) -> np.ndarray:
    """Bilinearly upsampled uniform noise with the given cell size."""
    cell = max(1, cell)
    coarse = rng.random((h // cell + 2, w // cell + 2))
    ys = np.arange(h) / cell
    xs = np.arange(w) / cell
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    c00 = coarse[np.ix_(y0, x0)]
    c01 = coarse[np.ix_(y0, x0 + 1)]
    c10 = coarse[np.ix_(y0 + 1, x0)]
    c11 = coarse[np.ix_(y0 + 1, x0 + 1)]
    return ((1 - fy) * ((1 - fx) * c00 + fx * c01)
            + fy * ((1 - fx) * c10 + fx * c11))


def _layered_noise(rng: np.random.Generator, h: int, w: int,
                   cells: tuple[int, ...], weights: tuple[float, ...] | None = None
                   ) -> np.ndarray:
    """Sum of smooth-noise octaves rescaled to span exactly [0, 1]."""
    if weights is None:
        weights = tuple(1.0 / (2 ** i) for i in range(len(cells)))
    acc = np.zeros((h, w))
    for cell, weight in zip(cells, weights):
        acc += weight * _smooth_noise(rng, h, w, cell)
    lo, hi = acc.min(), acc.max()
    return (acc - lo) / (hi - lo)


def _tint_channels(rng: np.random.Generator, shared: np.ndarray,
                   amount: float, cell: int) -> np.ndarray:
    """Stack a shared field into RGB with mildly decorrelated channels."""
    h, w = shared.shape
    chans = [shared * (1.0 - amount)
             + amount * _smooth_noise(rng, h, w, cell) for _ in range(3)]
    return np.stack(chans, axis=2)


def feasible_pair(rng: np.random.Generator, size: int,
                  alpha: float = 0.5) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Input, target, and the in-range residual that exactly produces it.

    Every channel of the residual spans exactly [0.01, 0.98]. Brightness of
    a gradient-matched reconstruction is only pinned through the
    feasibility bounds, so the tight per-channel span keeps the recoverable
    constant-shift slack to about +/-0.02 per channel.
    """
    base = _layered_noise(rng, size, size, cells=(size // 4, size // 8, size // 16))
    input_img = 0.05 + 0.90 * _tint_channels(rng, base, 0.15, size // 8)
    res_base = _layered_noise(rng, size, size, cells=(size // 3, size // 6, size // 12))
    residual = _tint_channels(rng, res_base, 0.1, size // 6)
    lo = residual.min(axis=(0, 1), keepdims=True)
    hi = residual.max(axis=(0, 1), keepdims=True)
    residual = 0.01 + (0.98 - 0.01) * (residual - lo) / (hi - lo)
    target = np.clip(alpha * input_img + (1.0 - alpha) * residual, 0.0, 1.0)
    return input_img, target, residual


def day2night_pair(rng: np.random.Generator, size: int
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Bright smooth daytime input and a darkened target rich in local
    contrast.

    The target tracks the combiner's pass-through of the input minus a
    small margin, then adds heavy-tailed multi-scale detail. Large parts of
    it sit below what the combiner can reach, so the clipped algebraic
    solve flattens that detail away, while a gradient-matched composite
    keeps the local structure at the price of a brightness offset.
    mean(target) < mean(input) always holds.
    """
    illumination = _layered_noise(rng, size, size, cells=(size // 3, size // 6))
    input_img = np.clip(
        _tint_channels(rng, 0.55 + 0.40 * illumination, 0.06, size // 4), 0, 1)
    texture = _layered_noise(rng, size, size,
                             cells=(size // 8, size // 16, size // 32))
    texture = (texture - texture.mean()) / texture.std()
    target = np.clip(0.5 * input_img - 0.015 + (0.09 * texture)[:, :, None],
                     0.0, 1.0)
    return input_img, target


def ramp_pair(rng: np.random.Generator, size: int,
              index: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat mid-gray input and a linear ramp target with a known slope.

    Even indices ramp left-to-right, odd indices top-to-bottom.
    """
    slope = 0.5 + 0.3 * rng.random()
    coords = np.arange(size) / (size - 1)
    if index % 2 == 0:
        ramp = np.broadcast_to(coords[None, :], (size, size))
    else:
        ramp = np.broadcast_to(coords[:, None], (size, size))
    target = np.repeat((0.15 + slope * ramp)[:, :, None], 3, axis=2)
    input_img = np.full((size, size, 3), 0.5)
    return input_img, np.clip(target, 0.0, 1.0)


def make_synthetic_corpus(kind: str, count: int, size: int, rng_seed: int,
                          out_dir: str | os.PathLike,
                          alpha: float = 0.5) -> list[tuple[str, str]]:
    """Write (input, target) PNG pairs; returns the file path pairs in order."""
    if kind not in CORPUS_KINDS:
        raise InvalidConfigError(f"unknown corpus kind {kind!r}; choose from {CORPUS_KINDS}")
    if size < MIN_CORPUS_SIZE:
        raise InvalidConfigError(f"size must be >= {MIN_CORPUS_SIZE}, got {size}")
    if count < 1:
        raise InvalidConfigError(f"count must be >= 1, got {count}")
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(rng_seed)
    pairs = []
    for i in range(count):
        if kind == "feasible":
            input_img, target, _ = feasible_pair(rng, size, alpha)
        elif kind == "day2night":
            input_img, target = day2night_pair(rng, size)
        else:
            input_img, target = ramp_pair(rng, size, i)
        input_path = os.path.join(out_dir, f"{kind}_{i:03d}_input.png")
        target_path = os.path.join(out_dir, f"{kind}_{i:03d}_target.png")
        save_image(input_img, input_path)
        save_image(target, target_path)
        pairs.append((input_path, target_path))
    return pairs
