"""Image and label-map representations, validation helpers, and file I/O.

Images are numpy arrays with values in [0, 255]: ``(H, W)`` for grayscale,
``(H, W, 3)`` for color. Label maps are 2-D non-negative integer arrays in
which 0 means background/unlabeled. Label maps persist as 16-bit grayscale
PNG, so labels above 65535 cannot be saved.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image as _PILImage

MAX_LABEL = 65535

# ITU-R 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])


def check_image(img, name: str = "image") -> np.ndarray:
    """Validate an image array and return it as float64 in [0, 255].

    Accepts ``(H, W)`` or ``(H, W, 3)`` arrays of any numeric dtype.
    """
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3):
        raise ValueError(f"{name}: expected 2-D or 3-D array, got shape {arr.shape}")
    if arr.ndim == 3 and arr.shape[2] != 3:
        raise ValueError(f"{name}: color images must have 3 channels, got {arr.shape[2]}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty image {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{name}: non-numeric dtype {arr.dtype}")
    arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite samples")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError(f"{name}: samples outside [0, 255]")
    return arr


def check_label_map(labels, shape: tuple[int, int] | None = None, name: str = "label map") -> np.ndarray:
    """Validate a label map and return it as a 2-D int64 array."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty map {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise ValueError(f"{name}: labels must be integers, got dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise ValueError(f"{name}: negative labels")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name}: shape {arr.shape} does not match expected {tuple(shape)}")
    return arr


def to_gray(img: np.ndarray) -> np.ndarray:
    """Collapse a color image to single-channel luma (ITU-R 601 weights)."""
    arr = check_image(img)
    if arr.ndim == 2:
        return arr
    return arr @ _LUMA


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB image to CIELAB (D65 white point)."""
    rgb = check_image(img)
    if rgb.ndim != 3:
        raise ValueError("rgb_to_lab expects a 3-channel image")
    srgb = rgb / 255.0
    linear = np.where(srgb > 0.04045, ((srgb + 0.055) / 1.055) ** 2.4, srgb / 12.92)
    m = np.array(
        [
            [0.4124564, 0.3575761, 0.1804375],
            [0.2126729, 0.7151522, 0.0721750],
            [0.0193339, 0.1191920, 0.9503041],
        ]
    )
    xyz = linear @ m.T
    # Normalize by the D65 reference white.
    xyz /= np.array([0.95047, 1.0, 1.08883])
    eps, kappa = 216.0 / 24389.0, 24389.0 / 27.0
    f = np.where(xyz > eps, np.cbrt(xyz), (kappa * xyz + 16.0) / 116.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def canonicalize_labels(labels: np.ndarray) -> np.ndarray:
    """Remap nonzero labels to the contiguous set 1..L, preserving order.

    0 stays 0. Label order follows ascending original label value.
    """
    arr = check_label_map(labels)
    values = np.unique(arr)
    values = values[values > 0]
    out = np.zeros_like(arr)
    for new, old in enumerate(values, start=1):
        out[arr == old] = new
    return out


def load_image(path) -> np.ndarray:
    """Load a raster image as uint8, grayscale ``(H, W)`` or color ``(H, W, 3)``."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"file not found: {path}")
    try:
        with _PILImage.open(path) as im:
            if im.mode in ("1", "L", "I", "I;16", "F"):
                im = im.convert("L")
                return np.asarray(im, dtype=np.uint8)
            im = im.convert("RGB")
            return np.asarray(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"unsupported or corrupt image file: {path} ({exc})") from exc


def save_image(img: np.ndarray, path) -> None:
    """Write an image as 8-bit PNG (grayscale or RGB)."""
    arr = check_image(img)
    data = np.clip(np.round(arr), 0, 255).astype(np.uint8)
    mode = "L" if data.ndim == 2 else "RGB"
    _PILImage.fromarray(data, mode=mode).save(path)


def save_label_map(labels: np.ndarray, path) -> None:
    """Write a label map as 16-bit grayscale PNG. Round-trips exactly."""
    arr = check_label_map(labels)
    if arr.max() > MAX_LABEL:
        raise ValueError(f"label {arr.max()} exceeds 16-bit limit {MAX_LABEL}")
    _PILImage.fromarray(arr.astype(np.uint16)).save(path)


def load_label_map(path) -> np.ndarray:
    """Load a label map written by :func:`save_label_map`."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"file not found: {path}")
    try:
        with _PILImage.open(path) as im:
            if im.mode not in ("I;16", "I", "L", "P"):
                raise ValueError(f"not a single-channel label map: {path} (mode {im.mode})")
            arr = np.asarray(im, dtype=np.int64)
    except FileNotFoundError:
        raise
    except ValueError:
        raise
    except Exception as exc:
        raise ValueError(f"unsupported or corrupt label map: {path} ({exc})") from exc
    if arr.ndim != 2:
        raise ValueError(f"not a single-channel label map: {path}")
    return arr
