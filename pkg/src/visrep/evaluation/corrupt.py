"""Image corruptions used by the robustness protocol.

Four transforms with fixed reference strengths: additive Gaussian noise at
scale 0.1 * 255, Gaussian blur at sigma 3, brightness + 100, and linear
contrast 1.5. Results clamp to [0, 255] and round back to uint8; noise is
deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..image import check_image

CORRUPTION_KINDS = ("gaussian_noise", "gaussian_blur", "brightness", "contrast")

_CONTRAST_PIVOT = 127.0


def corrupt_image(
    img: np.ndarray,
    kind: str,
    seed: int = 0,
    noise_scale: float = 0.1 * 255,
    blur_sigma: float = 3.0,
    brightness_delta: float = 100.0,
    contrast_factor: float = 1.5,
) -> np.ndarray:
    """Apply exactly one corruption and return the uint8 result."""
    arr = check_image(img)
    if kind == "gaussian_noise":
        rng = np.random.default_rng(seed)
        out = arr + rng.normal(0.0, noise_scale, size=arr.shape)
    elif kind == "gaussian_blur":
        sigma = (blur_sigma, blur_sigma) if arr.ndim == 2 else (blur_sigma, blur_sigma, 0)
        out = ndimage.gaussian_filter(arr, sigma, mode="reflect")
    elif kind == "brightness":
        out = arr + brightness_delta
    elif kind == "contrast":
        out = _CONTRAST_PIVOT + contrast_factor * (arr - _CONTRAST_PIVOT)
    else:
        raise ValueError(f"unknown corruption {kind!r}; valid kinds: {', '.join(CORRUPTION_KINDS)}")
    return np.clip(np.round(out), 0, 255).astype(np.uint8)
