"""Contour keypoints (Canny) and oriented-gradient descriptors (DAISY layout).

The detector runs the classic Canny chain: Gaussian smoothing, Sobel
gradients, non-maximum suppression along the quantized gradient direction,
and double-threshold hysteresis. Hysteresis thresholds apply to the gradient
magnitude rescaled so its maximum is 255.

Descriptors follow the DAISY layout: ``h`` rectified oriented-gradient maps,
Gaussian-smoothed once per ring, sampled bilinearly at the keypoint plus
``q`` rings of ``t`` points each. Each (q*t + 1) histogram block is
L2-normalized after an epsilon shift, so a zero-gradient block becomes the
uniform unit vector instead of NaN.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .image import check_image, to_gray

_EPS = 1e-10


@dataclass(frozen=True)
class KeypointSet:
    """Contour keypoints as an ``(n, 2)`` int array of (x, y) pixel positions."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def x(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.positions[:, 1]


@dataclass(frozen=True)
class DaisyParams:
    """Geometry of the descriptor: outer radius, rings, samples, orientations."""

    radius: int = 30
    rings: int = 3
    histograms: int = 8
    orientations: int = 8

    def __post_init__(self):
        if not self.radius >= self.rings >= 1:
            raise ValueError(f"need radius >= rings >= 1, got {self.radius}/{self.rings}")
        if self.histograms < 4:
            raise ValueError(f"histograms per ring must be >= 4, got {self.histograms}")
        if self.orientations < 4:
            raise ValueError(f"orientation bins must be >= 4, got {self.orientations}")

    @property
    def ring_radii(self) -> np.ndarray:
        q = self.rings
        return self.radius * (np.arange(q) + 1.0) / q

    @property
    def ring_sigmas(self) -> np.ndarray:
        q = self.rings
        return self.radius * (np.arange(q) + 1.0) / (2.0 * q)

    @property
    def dim(self) -> int:
        return (self.rings * self.histograms + 1) * self.orientations


@dataclass(frozen=True)
class DescriptorSet:
    """Descriptor rows index-aligned with a KeypointSet."""

    vectors: np.ndarray  # (n, dim) float64, blockwise unit L2 norm
    block_size: int  # orientation bins per histogram block

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _gaussian_kernel1d(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _smooth(gray: np.ndarray, sigma: float = 1.4, radius: int = 2) -> np.ndarray:
    k = _gaussian_kernel1d(sigma, radius)
    out = ndimage.convolve1d(gray, k, axis=0, mode="reflect")
    return ndimage.convolve1d(out, k, axis=1, mode="reflect")


def _sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = ndimage.sobel(img, axis=1, mode="reflect")
    gy = ndimage.sobel(img, axis=0, mode="reflect")
    return gx, gy


def _nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Zero out pixels that are not local maxima along the gradient direction."""
    h, w = mag.shape
    padded = np.zeros((h + 2, w + 2), dtype=mag.dtype)
    padded[1:-1, 1:-1] = mag

    angle = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.floor((angle + np.pi / 8) / (np.pi / 4)).astype(np.int64) % 4

    # bin -> (dy, dx) of one neighbour along the gradient (other is mirrored)
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(mag, dtype=bool)
    for b, (dy, dx) in offsets.items():
        sel = bins == b
        n1 = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        n2 = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        keep |= sel & (mag >= n1) & (mag >= n2)
    return np.where(keep & (mag > 0), mag, 0.0)


def canny_edges(img: np.ndarray, low: float = 50.0, high: float = 150.0) -> np.ndarray:
    """Boolean edge mask from the Canny chain.

    ``low``/``high`` are hysteresis thresholds on the gradient magnitude
    rescaled to a 0..255 range.
    """
    if not 0 < low < high:
        raise ValueError(f"need 0 < low < high, got {low}/{high}")
    gray = to_gray(img)
    smoothed = _smooth(gray)
    gx, gy = _sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak <= 0:
        return np.zeros(gray.shape, dtype=bool)
    mag *= 255.0 / peak
    nms = _nonmax_suppress(mag, gx, gy)

    strong = nms >= high
    weak = nms >= low
    if not strong.any():
        return np.zeros(gray.shape, dtype=bool)
    comp, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep_ids = np.unique(comp[strong])
    return weak & np.isin(comp, keep_ids)


def detect_contour_keypoints(
    img: np.ndarray,
    canny_low: float = 50.0,
    canny_high: float = 150.0,
    budget: int = 9000,
    border_margin: int = 30,
) -> KeypointSet:
    """Edge pixels of the image, border-trimmed and capped at ``budget``.

    Keypoints closer than ``border_margin`` to any border are dropped so a
    descriptor support of that radius always fits. When more edge pixels
    survive than the budget allows, an evenly spaced subsample (in row-major
    pixel order) of exactly ``budget`` points is returned; the rule is
    deterministic, so identical inputs give identical keypoints.
    """
    arr = check_image(img)
    h, w = arr.shape[:2]
    if border_margin < 0:
        raise ValueError(f"border_margin must be >= 0, got {border_margin}")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if h < 2 * border_margin + 1 or w < 2 * border_margin + 1:
        raise ValueError(
            f"image {w}x{h} smaller than 2*margin+1 = {2 * border_margin + 1} in some dimension"
        )
    mask = canny_edges(arr, canny_low, canny_high)
    ys, xs = np.nonzero(mask)
    inside = (
        (xs >= border_margin)
        & (xs <= w - 1 - border_margin)
        & (ys >= border_margin)
        & (ys <= h - 1 - border_margin)
    )
    xs, ys = xs[inside], ys[inside]
    n = len(xs)
    if n > budget:
        idx = np.floor(np.linspace(0, n - 1, budget)).astype(np.int64)
        xs, ys = xs[idx], ys[idx]
    return KeypointSet(np.column_stack([xs, ys]))


def _sample_bilinear(stack: np.ndarray, py: np.ndarray, px: np.ndarray) -> np.ndarray:
    """Sample every map of a (h, H, W) stack at fractional (py, px) points.

    Returns (n, h). Points must lie inside the image rectangle.
    """
    _, height, width = stack.shape
    y0 = np.floor(py).astype(np.int64)
    x0 = np.floor(px).astype(np.int64)
    fy = py - y0
    fx = px - x0
    y1 = np.minimum(y0 + 1, height - 1)
    x1 = np.minimum(x0 + 1, width - 1)

    v00 = stack[:, y0, x0]
    v01 = stack[:, y0, x1]
    v10 = stack[:, y1, x0]
    v11 = stack[:, y1, x1]
    out = (
        v00 * ((1 - fy) * (1 - fx))
        + v01 * ((1 - fy) * fx)
        + v10 * (fy * (1 - fx))
        + v11 * (fy * fx)
    )
    return out.T


def compute_daisy(img: np.ndarray, kps: KeypointSet, params: DaisyParams | None = None) -> DescriptorSet:
    """DAISY-layout descriptor for every keypoint.

    Block order: the center histogram first, then rings inner to outer, each
    ring walking its ``t`` sample points counterclockwise from angle 0.
    """
    params = params or DaisyParams()
    gray = to_gray(img)
    h_img, w_img = gray.shape
    r = params.radius

    pos = kps.positions
    if len(pos):
        if (
            pos[:, 0].min() < r
            or pos[:, 0].max() > w_img - 1 - r
            or pos[:, 1].min() < r
            or pos[:, 1].max() > h_img - 1 - r
        ):
            raise ValueError(f"keypoints closer than radius {r} to the image border")

    gy, gx = np.gradient(gray)
    angles = 2.0 * np.pi * np.arange(params.orientations) / params.orientations
    oriented = np.stack(
        [np.maximum(np.cos(a) * gx + np.sin(a) * gy, 0.0) for a in angles]
    )

    # One smoothed copy of the oriented-gradient stack per ring level; the
    # center block reuses the innermost (least smoothed) level.
    levels = [
        np.stack([ndimage.gaussian_filter(m, sigma, mode="reflect") for m in oriented])
        for sigma in params.ring_sigmas
    ]

    n = len(pos)
    n_blocks = params.rings * params.histograms + 1
    vectors = np.empty((n, n_blocks, params.orientations), dtype=np.float64)
    if n:
        kx = pos[:, 0].astype(np.float64)
        ky = pos[:, 1].astype(np.float64)
        vectors[:, 0, :] = _sample_bilinear(levels[0], ky, kx)
        block = 1
        for ring, (rad, _sigma) in enumerate(zip(params.ring_radii, params.ring_sigmas)):
            for j in range(params.histograms):
                theta = 2.0 * np.pi * j / params.histograms
                vectors[:, block, :] = _sample_bilinear(
                    levels[ring],
                    ky + rad * np.sin(theta),
                    kx + rad * np.cos(theta),
                )
                block += 1

    vectors += _EPS
    vectors /= np.linalg.norm(vectors, axis=2, keepdims=True)
    return DescriptorSet(vectors.reshape(n, n_blocks * params.orientations), params.orientations)


def dump_keypoints_csv(kps: KeypointSet, path) -> None:
    """Debug dump: one ``x,y`` line per keypoint."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in kps.positions:
            fh.write(f"{x},{y}\n")


def load_keypoints_csv(path) -> KeypointSet:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                x, y = line.split(",")
                rows.append((int(x), int(y)))
    return KeypointSet(np.array(rows, dtype=np.int64).reshape(-1, 2))


def dump_descriptors(desc: DescriptorSet, path) -> None:
    """Debug dump: 8-byte header (row count, dim as little-endian uint32),
    then row-major little-endian float32."""
    vec = np.ascontiguousarray(desc.vectors, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", vec.shape[0], vec.shape[1]))
        fh.write(vec.tobytes())


def load_descriptors(path, block_size: int = 8) -> DescriptorSet:
    with open(path, "rb") as fh:
        rows, dim = struct.unpack("<II", fh.read(8))
        vec = np.frombuffer(fh.read(rows * dim * 4), dtype="<f4").reshape(rows, dim)
    return DescriptorSet(vec.astype(np.float64), block_size)
