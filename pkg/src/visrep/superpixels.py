"""SLIC superpixels: localized k-means over color and scaled position.

Color images are clustered in CIELAB; grayscale images use raw intensity.
After the assignment iterations, connectivity is enforced: every label ends
up 4-connected, and fragments smaller than a quarter of the nominal
superpixel area are merged into their largest adjacent region. Labels are
canonicalized to 1..P in row-major order of first appearance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import check_image, rgb_to_lab, to_gray

_SMOOTH_SIGMA = 1.0


@dataclass(frozen=True)
class SuperpixelLabeling:
    """Dense superpixel assignment with per-label summary statistics."""

    labels: np.ndarray  # (H, W) int64 in 1..count, every pixel labeled
    centers_xy: np.ndarray  # (count, 2) mean (x, y) per label, label order
    centers_color: np.ndarray  # (count, C) mean color per label

    @property
    def count(self) -> int:
        return len(self.centers_xy)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def _seed_grid(height: int, width: int, n_segments: int) -> tuple[int, int]:
    nx = int(round(np.sqrt(n_segments * width / height)))
    nx = max(1, min(nx, n_segments, width))
    ny = max(1, min(n_segments // nx, height))
    return nx, ny


def _perturbed_seeds(gray: np.ndarray, nx: int, ny: int) -> np.ndarray:
    """Seed pixels at grid-cell centers, nudged to the lowest-gradient pixel
    in their 3x3 neighbourhood (ties resolve row-major)."""
    h, w = gray.shape
    gy, gx = np.gradient(gray)
    grad = gx * gx + gy * gy
    seeds = np.empty((ny * nx, 2), dtype=np.int64)  # (y, x)
    i = 0
    for gy_i in range(ny):
        cy = int((gy_i + 0.5) * h / ny)
        for gx_i in range(nx):
            cx = int((gx_i + 0.5) * w / nx)
            y0, y1 = max(0, cy - 1), min(h, cy + 2)
            x0, x1 = max(0, cx - 1), min(w, cx + 2)
            patch = grad[y0:y1, x0:x1]
            dy, dx = np.unravel_index(np.argmin(patch), patch.shape)
            seeds[i] = (y0 + dy, x0 + dx)
            i += 1
    return seeds


def _enforce_connectivity(
    assign: np.ndarray, min_size: float, max_regions: int
) -> np.ndarray:
    """Split disconnected labels, merge fragments below ``min_size`` into
    their largest 4-adjacent region, then keep merging the smallest regions
    until at most ``max_regions`` remain."""
    h, w = assign.shape
    comp = np.zeros((h, w), dtype=np.int64)
    next_id = 1
    for value in np.unique(assign):
        mask = assign == value
        lab, k = ndimage.label(mask)
        comp[mask] = lab[mask] + (next_id - 1)
        next_id += k
    n_comp = next_id - 1

    sizes = np.bincount(comp.ravel(), minlength=n_comp + 1)
    neighbors: dict[int, set[int]] = {i: set() for i in range(1, n_comp + 1)}
    for a, b in ((comp[:, :-1], comp[:, 1:]), (comp[:-1, :], comp[1:, :])):
        diff = a != b
        pairs = np.unique(np.stack([a[diff], b[diff]], axis=1), axis=0)
        for u, v in pairs:
            neighbors[int(u)].add(int(v))
            neighbors[int(v)].add(int(u))

    parent = list(range(n_comp + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    size = {i: int(sizes[i]) for i in range(1, n_comp + 1)}

    def merge(r: int) -> None:
        target = max(neighbors[r], key=lambda t: (size[t], -t))
        parent[r] = target
        size[target] += size.pop(r)
        moved = neighbors.pop(r)
        moved.discard(target)
        for x in moved:
            neighbors[x].discard(r)
            neighbors[x].add(target)
            neighbors[target].add(x)
        neighbors[target].discard(r)

    changed = True
    while changed:
        changed = False
        roots = [r for r in neighbors if find(r) == r]
        for r in sorted(roots, key=lambda r: (size[r], r)):
            if find(r) != r or r not in neighbors or size[r] >= min_size or not neighbors[r]:
                continue
            merge(r)
            changed = True

    # never hand back more regions than were asked for
    while len(neighbors) > max_regions:
        r = min(
            (r for r in neighbors if neighbors[r]), key=lambda r: (size[r], r), default=None
        )
        if r is None:
            break
        merge(r)

    root_of = np.array([find(i) for i in range(n_comp + 1)], dtype=np.int64)
    rooted = root_of[comp]
    # canonical 1..P in row-major order of first appearance
    flat = rooted.ravel()
    first = np.zeros(n_comp + 1, dtype=np.int64)
    seen = np.unique(flat, return_index=True)
    order = np.argsort(seen[1])
    for new, old in enumerate(seen[0][order], start=1):
        first[old] = new
    return first[rooted]


def slic_segment(
    img: np.ndarray,
    n_segments: int = 150,
    compactness: float = 10.0,
    iterations: int = 10,
) -> SuperpixelLabeling:
    """Partition the image into at most ``n_segments`` compact superpixels.

    Runs localized k-means with spatial step ``S = sqrt(N / n_segments)``:
    each cluster claims pixels within its ``2S x 2S`` search window by the
    combined distance ``d_color^2 + (compactness / S)^2 * d_xy^2``, ties
    going to the lower cluster index. Deterministic for fixed inputs.
    """
    arr = check_image(img)
    h, w = arr.shape[:2]
    n_pixels = h * w
    if n_segments < 2:
        raise ValueError(f"n_segments must be >= 2, got {n_segments}")
    if n_segments > n_pixels:
        raise ValueError(f"n_segments {n_segments} exceeds pixel count {n_pixels}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if compactness <= 0:
        raise ValueError(f"compactness must be > 0, got {compactness}")

    # Standard SLIC preprocessing: a light Gaussian blur keeps pixel noise
    # from serrating the superpixel boundaries.
    s = _SMOOTH_SIGMA
    arr = np.clip(ndimage.gaussian_filter(arr, sigma=(s, s, 0)[: arr.ndim]), 0, 255)
    feat = rgb_to_lab(arr) if arr.ndim == 3 else arr[:, :, None]
    n_feat = feat.shape[2]
    step = np.sqrt(n_pixels / n_segments)
    inv_s2 = (compactness / step) ** 2

    nx, ny = _seed_grid(h, w, n_segments)
    seeds = _perturbed_seeds(to_gray(arr), nx, ny)
    centers_xy = seeds[:, ::-1].astype(np.float64)  # (x, y)
    centers_feat = feat[seeds[:, 0], seeds[:, 1]].astype(np.float64)
    n_clusters = len(seeds)

    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    assign = np.full((h, w), -1, dtype=np.int64)
    # search half-width: the window must cover the seed spacing
    half = int(np.ceil(max(step, w / nx, h / ny)))

    for _ in range(iterations):
        best = np.full((h, w), np.inf)
        assign.fill(-1)
        for c in range(n_clusters):
            cx, cy = centers_xy[c]
            x0, x1 = max(0, int(cx) - half), min(w, int(cx) + half + 1)
            y0, y1 = max(0, int(cy) - half), min(h, int(cy) + half + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            d2 = np.zeros((y1 - y0, x1 - x0))
            for f in range(n_feat):
                diff = feat[y0:y1, x0:x1, f] - centers_feat[c, f]
                d2 += diff * diff
            dx = xs[x0:x1] - cx
            dy = ys[y0:y1] - cy
            d2 += inv_s2 * (dx * dx)[None, :]
            d2 += inv_s2 * (dy * dy)[:, None]
            view = best[y0:y1, x0:x1]
            better = d2 < view
            view[better] = d2[better]
            assign[y0:y1, x0:x1][better] = c

        # stragglers outside every window: nearest center spatially
        missing = assign < 0
        if missing.any():
            my, mx = np.nonzero(missing)
            d = (mx[:, None] - centers_xy[None, :, 0]) ** 2 + (
                my[:, None] - centers_xy[None, :, 1]
            ) ** 2
            assign[my, mx] = np.argmin(d, axis=1)

        flat = assign.ravel()
        counts = np.bincount(flat, minlength=n_clusters).astype(np.float64)
        nonempty = counts > 0
        gx = np.bincount(flat, weights=np.tile(xs, h), minlength=n_clusters)
        gy = np.bincount(flat, weights=np.repeat(ys, w), minlength=n_clusters)
        centers_xy[nonempty, 0] = gx[nonempty] / counts[nonempty]
        centers_xy[nonempty, 1] = gy[nonempty] / counts[nonempty]
        for f in range(n_feat):
            gf = np.bincount(flat, weights=feat[:, :, f].ravel(), minlength=n_clusters)
            centers_feat[nonempty, f] = gf[nonempty] / counts[nonempty]

    labels = _enforce_connectivity(
        assign, min_size=step * step / 4.0, max_regions=n_segments
    )

    count = int(labels.max())
    flat = (labels - 1).ravel()
    sizes = np.bincount(flat, minlength=count).astype(np.float64)
    out_xy = np.stack(
        [
            np.bincount(flat, weights=np.tile(xs, h), minlength=count) / sizes,
            np.bincount(flat, weights=np.repeat(ys, w), minlength=count) / sizes,
        ],
        axis=1,
    )
    out_color = np.stack(
        [
            np.bincount(flat, weights=feat[:, :, f].ravel(), minlength=count) / sizes
            for f in range(n_feat)
        ],
        axis=1,
    )
    return SuperpixelLabeling(labels, out_xy, out_color)
