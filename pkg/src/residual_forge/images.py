"""Image representation, file I/O, unit-range clipping, and patch tiling.

Images are float64 numpy arrays of shape (H, W, 3), interleaved RGB,
row-major, nominal range [0, 1]. Storage permits out-of-range values so
residuals under optimization can overshoot before clipping. All functions
here are pure; arrays are treated as immutable values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import (
    ImageTooSmallError,
    PatchTooSmallError,
    ShapeMismatchError,
    UnsupportedFormatError,
)

MIN_IMAGE_SIDE = 3  # minimum for one 3x3 gradient window
MIN_PATCH_SIZE = 8

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# PNG color types from the IHDR chunk
_PNG_GRAY = 0
_PNG_RGB = 2
_PNG_PALETTE = 3
_PNG_GRAY_ALPHA = 4
_PNG_RGBA = 6


def require_image(img: np.ndarray, name: str = "image",
                  min_side: int = MIN_IMAGE_SIDE) -> None:
    """Validate the (H, W, 3) layout and the minimum spatial size."""
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3:
        raise ShapeMismatchError(f"{name} must be an (H, W, 3) array, got shape "
                                 f"{getattr(img, 'shape', None)}")
    if img.shape[0] < min_side or img.shape[1] < min_side:
        raise ImageTooSmallError(
            f"{name} is {img.shape[0]}x{img.shape[1]}; minimum is "
            f"{min_side}x{min_side}")


def require_same_shape(a: np.ndarray, b: np.ndarray,
                       names: tuple[str, str] = ("first", "second")) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"{names[0]} has shape {a.shape} but {names[1]} has shape {b.shape}")


def _reject_unsupported_png(header: bytes, path: str) -> None:
    # IHDR is always the first chunk: bit depth at byte 24, color type at 25.
    if len(header) < 26:
        raise UnsupportedFormatError(f"{path}: truncated PNG header")
    bit_depth = header[24]
    color_type = header[25]
    if color_type == _PNG_PALETTE:
        raise UnsupportedFormatError(
            f"{path}: palette (indexed) color is not supported; convert to 8-bit RGB")
    if color_type in (_PNG_GRAY_ALPHA, _PNG_RGBA):
        raise UnsupportedFormatError(
            f"{path}: alpha channel is not supported; strip alpha and retry")
    if bit_depth != 8:
        raise UnsupportedFormatError(
            f"{path}: {bit_depth}-bit samples are not supported; 8-bit required")
    if color_type not in (_PNG_GRAY, _PNG_RGB):
        raise UnsupportedFormatError(
            f"{path}: PNG color type {color_type} is not supported")


def _load_png(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(26)
    _reject_unsupported_png(header, path)
    with Image.open(path) as im:
        im.load()
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
            arr = np.repeat(arr[:, :, None], 3, axis=2)
        elif im.mode == "RGB":
            arr = np.asarray(im, dtype=np.uint8)
        else:
            raise UnsupportedFormatError(
                f"{path}: decoded mode {im.mode!r} is not 8-bit grayscale or RGB")
    return arr


def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comment lines between header fields.
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c in b" \t\r\n":
            pos += 1
        elif c == b"#":
            while pos < n and data[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos:pos + 1] not in b" \t\r\n":
        pos += 1
    return data[start:pos], pos


def _load_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_ppm_token(data, 0)
    if magic != b"P6":
        raise UnsupportedFormatError(f"{path}: PPM magic {magic!r} is not binary P6")
    fields = []
    for _ in range(3):
        tok, pos = _read_ppm_token(data, pos)
        if not tok.isdigit():
            raise UnsupportedFormatError(f"{path}: malformed PPM header")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval > 255:
        raise UnsupportedFormatError(
            f"{path}: 16-bit PPM (maxval {maxval}) is not supported; maxval 255 required")
    if maxval != 255:
        raise UnsupportedFormatError(
            f"{path}: PPM maxval {maxval} is not supported; 255 required")
    pos += 1  # single whitespace byte after maxval
    need = width * height * 3
    raw = data[pos:pos + need]
    if len(raw) < need:
        raise UnsupportedFormatError(f"{path}: PPM pixel data truncated")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Load an 8-bit RGB PNG or binary PPM (P6) as float64 in [0, 1].

    Grayscale PNGs are replicated to three channels. 16-bit, palette, and
    alpha-channel files are rejected with a message naming the feature.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        prefix = fh.read(8)
    if prefix == _PNG_SIGNATURE:
        arr = _load_png(path)
    elif prefix[:2] == b"P6":
        arr = _load_ppm(path)
    else:
        raise UnsupportedFormatError(
            f"{path}: not a PNG or binary PPM (P6) file")
    img = arr.astype(np.float64) / 255.0
    require_image(img, name=path)
    return img


def quantize_unit(img: np.ndarray) -> np.ndarray:
    """Clip to [0, 1] and quantize with round-half-up to uint8."""
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write as 8-bit RGB PNG; out-of-range values are clipped first."""
    require_image(img, name="image to save", min_side=1)
    Image.fromarray(quantize_unit(img), mode="RGB").save(os.fspath(path),
                                                         format="PNG")


def clip_unit(img: np.ndarray) -> np.ndarray:
    """Elementwise min(max(v, 0), 1)."""
    return np.clip(img, 0.0, 1.0)


def clip_pass_mask(img: np.ndarray) -> np.ndarray:
    """Boolean mask of values the clip leaves untouched.

    True on the closed interval [0, 1] (values exactly at a bound pass
    gradients through), False strictly outside.
    """
    return (img >= 0.0) & (img <= 1.0)


@dataclass(frozen=True)
class PatchGrid:
    """Non-overlapping top-left tiling of an image.

    Each patch is (row, col, height, width). A trailing remainder strip
    always extends the last full patch of its row/column, so boundary
    patches range from patch_size up to 2*patch_size - 1; if the image is
    smaller than patch_size in a dimension, that dimension is one patch.
    """
    patch_size: int
    height: int
    width: int
    patches: tuple[tuple[int, int, int, int], ...]


def _spans(extent: int, size: int) -> list[tuple[int, int]]:
    n = extent // size
    if n == 0:
        return [(0, extent)]
    spans = [(i * size, size) for i in range(n)]
    remainder = extent - n * size
    if remainder:
        start, _ = spans[-1]
        spans[-1] = (start, size + remainder)
    return spans


def tile_patches(height: int, width: int, patch_size: int) -> PatchGrid:
    """Tile an H x W extent into patches of patch_size (>= 8)."""
    if patch_size < MIN_PATCH_SIZE:
        raise PatchTooSmallError(
            f"patch_size {patch_size} is below the minimum {MIN_PATCH_SIZE}")
    rows = _spans(height, patch_size)
    cols = _spans(width, patch_size)
    patches = tuple((r, c, rh, cw) for r, rh in rows for c, cw in cols)
    return PatchGrid(patch_size=patch_size, height=height, width=width,
                     patches=patches)
