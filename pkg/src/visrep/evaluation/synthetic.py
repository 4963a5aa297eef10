"""Synthetic two-level benchmark scenes.

Each scene scatters ``n_motifs`` procedurally generated motifs, every motif
stamped ``n_instances`` times (pixel-identical up to the final noise pass)
onto jittered, non-overlapping grid cells. Ground truth comes in two
semantic levels: level 2 labels each motif identity, level 1 labels motif
families (motifs are paired off, so two consecutive motifs share a family,
like two products of one brand).
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass

import numpy as np

_SHAPES = ("disc", "square", "diamond", "ring", "cross", "triangle")
_MIN_TILE = 16


@dataclass(frozen=True)
class GroundTruth:
    """Label maps keyed by semantic level (1 = families, 2 = identities)."""

    levels: dict  # {level id: (H, W) int64 label map}

    def level(self, level_id: int) -> np.ndarray:
        if level_id not in self.levels:
            raise KeyError(f"no ground-truth level {level_id}; have {sorted(self.levels)}")
        return self.levels[level_id]


def _shape_mask(
    kind: str, size: int, cx: float, cy: float, radius: float, rot: float = 0.0
) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx, dy = xx - cx, yy - cy
    if rot:
        c, s = np.cos(rot), np.sin(rot)
        dx, dy = c * dx + s * dy, -s * dx + c * dy
    if kind == "disc":
        return dx * dx + dy * dy <= radius * radius
    if kind == "square":
        return np.maximum(np.abs(dx), np.abs(dy)) <= radius * 0.9
    if kind == "diamond":
        return np.abs(dx) + np.abs(dy) <= radius * 1.2
    if kind == "ring":
        d2 = dx * dx + dy * dy
        return (d2 <= radius * radius) & (d2 >= (0.45 * radius) ** 2)
    if kind == "cross":
        arm = radius * 0.42
        return ((np.abs(dx) <= arm) & (np.abs(dy) <= radius)) | (
            (np.abs(dy) <= arm) & (np.abs(dx) <= radius)
        )
    if kind == "triangle":
        top = cy - radius
        return (dy >= -radius) & (dy <= radius * 0.85) & (
            np.abs(dx) <= 0.7 * (yy - top)
        )
    raise ValueError(f"unknown shape {kind!r}")


_LUMA = np.array([0.299, 0.587, 0.114])


def _color_with_luma(hue: float, sat: float, gray: float) -> np.ndarray:
    """RGB triple (0..255) of the given hue/saturation hitting a target luma."""
    base = np.array(colorsys.hsv_to_rgb(hue % 1.0, sat, 1.0))
    return base * (gray / float(base @ _LUMA))


def _render_motif(index: int, n_motifs: int, tile: int, rng: np.random.Generator):
    """One motif tile and its opaque mask.

    Styling constraints, so the benchmark stays solvable yet honest:

    - Colors are picked by target luma, and motif lumas stay at or below
      ~156 against the luma-210 background, so the reference corruptions
      (brightness +100, contrast 1.5) saturate pixels without erasing any
      edge contrast.
    - Each motif nests three shapes with alternating dark/light fills. Every
      interior luma step is >60% of the motif/background step, so interior
      contours clear edge-detector hysteresis on their own.
    - Most contour length therefore lies well inside the silhouette, where
      keypoints stay on the motif's own superpixels even when noise or blur
      jiggle superpixel boundaries at the rim; interior steps are >=7px
      apart so a sigma-3 blur cannot merge them away.
    """
    hue = (index / max(n_motifs, 1) + float(rng.uniform(0, 0.04))) % 1.0
    outer_kind = _SHAPES[index % len(_SHAPES)]
    mid_kind = _SHAPES[(index * 2 + 3) % len(_SHAPES)]
    core_kind = _SHAPES[(index * 3 + 1) % len(_SHAPES)]
    dark = 52.0 + 4.0 * (index % 3)
    light = 156.0 - 4.0 * (index % 3)

    c = tile / 2.0
    outer_r = tile * 0.46
    rot = float(rng.uniform(0, 2.0 * np.pi))
    img = np.zeros((tile, tile, 3), dtype=np.float64)
    outer = _shape_mask(outer_kind, tile, c, c, outer_r, rot)
    img[outer] = _color_with_luma(hue, 0.9, dark)

    ox = float(rng.uniform(-0.06, 0.06)) * tile
    oy = float(rng.uniform(-0.06, 0.06)) * tile
    mid = _shape_mask(mid_kind, tile, c + ox, c + oy, outer_r * 0.62, rot) & outer
    img[mid] = _color_with_luma(hue + 0.45, 0.35, light)

    core = _shape_mask(core_kind, tile, c + ox, c + oy, outer_r * 0.30, rot) & mid
    img[core] = _color_with_luma(hue + 0.1, 0.7, dark + 6.0)
    return img, outer


def generate_synthetic(
    n_motifs: int = 3,
    n_instances: int = 12,
    size: tuple[int, int] = (672, 672),
    jitter: int = 4,
    noise: float = 0.02,
    seed: int = 0,
) -> tuple[np.ndarray, GroundTruth]:
    """Render one scene and its two ground-truth levels.

    ``size`` is (height, width). ``noise`` is the additive Gaussian sigma as
    a fraction of 255. The same seed reproduces the scene bit for bit.
    """
    if n_motifs < 1 or n_instances < 1:
        raise ValueError("n_motifs and n_instances must be >= 1")
    if jitter < 0:
        raise ValueError(f"jitter must be >= 0, got {jitter}")
    height, width = int(size[0]), int(size[1])
    total = n_motifs * n_instances

    gx = int(np.ceil(np.sqrt(total * width / height)))
    gy = int(np.ceil(total / gx))
    cell_w, cell_h = width // gx, height // gy
    # Motifs cover just under half the cell: the wide blank gap between
    # instances keeps every superpixel on a single instance, so patterns
    # cannot chain together through shared border superpixels.
    tile = int(min(cell_w, cell_h) * 0.45)
    margin = (min(cell_w, cell_h) - tile) // 2
    if tile < _MIN_TILE or margin < jitter + 1:
        raise ValueError(
            f"canvas {width}x{height} too small for {total} placements "
            f"with jitter {jitter} (tile {tile}px, need >= {_MIN_TILE})"
        )

    rng = np.random.default_rng(seed)
    tiles = [_render_motif(i, n_motifs, tile, rng) for i in range(n_motifs)]

    background = 210.0
    img = np.full((height, width, 3), background, dtype=np.float64)
    level2 = np.zeros((height, width), dtype=np.int64)
    level1 = np.zeros((height, width), dtype=np.int64)

    cells = rng.permutation(gx * gy)[:total]
    motif_of = np.repeat(np.arange(n_motifs), n_instances)
    for cell, motif in zip(cells, motif_of):
        cy, cx = divmod(int(cell), gx)
        jx = int(rng.integers(-jitter, jitter + 1)) if jitter else 0
        jy = int(rng.integers(-jitter, jitter + 1)) if jitter else 0
        y0 = cy * cell_h + margin + jy
        x0 = cx * cell_w + margin + jx
        tile_img, mask = tiles[motif]
        region = img[y0 : y0 + tile, x0 : x0 + tile]
        region[mask] = tile_img[mask]
        level2[y0 : y0 + tile, x0 : x0 + tile][mask] = motif + 1
        level1[y0 : y0 + tile, x0 : x0 + tile][mask] = motif // 2 + 1

    if noise > 0:
        img += rng.normal(0.0, noise * 255.0, size=img.shape)
    img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    return img, GroundTruth({1: level1, 2: level2})
