"""Splashes, accumulator voting, and peak thresholding.

A splash is the star of displacement edges from one keypoint to its k most
descriptor-similar keypoints. All splashes vote into a shared accumulator
grid of double the image size, indexed by displacement and centered at the
origin cell, so recurring displacements from repeated patterns pile up into
peaks regardless of where in the image they occur. Cells above the threshold
are backprojected to the splash edges that voted there.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .features import DescriptorSet, KeypointSet

_BLOCK = 512  # keypoints per distance-matrix block
_VOTE_CHUNK = 20000


@dataclass(frozen=True)
class Splash:
    """Directed displacement star from one keypoint.

    ``neighbors`` and ``displacements`` are ordered by ascending descriptor
    distance, so endpoint ``i`` has similarity rank ``i + 1``.
    """

    center: int
    neighbors: np.ndarray  # (m,) keypoint indices
    displacements: np.ndarray  # (m, 2) int (dx, dy), endpoint minus center

    def __len__(self) -> int:
        return len(self.neighbors)

    @property
    def ranks(self) -> np.ndarray:
        return np.arange(1, len(self.neighbors) + 1)


@dataclass(frozen=True)
class Accumulator:
    """Vote grid plus the backtracking index from cells to splash edges.

    ``grid`` has shape ``(2H+1, 2W+1)`` for an ``H x W`` image with the
    zero-displacement origin at ``(H, W)``. Each vote deposits a normalized
    Gaussian window, so the backtracking footprint of a vote is the full
    ``window x window`` square around its center cell.
    """

    grid: np.ndarray
    image_shape: tuple[int, int]
    window: int
    vote_edges: np.ndarray  # (n_votes, 2) int: (origin keypoint, endpoint keypoint)
    vote_cells: np.ndarray  # (n_votes, 2) int: (row, col) of the vote center cell

    @property
    def origin(self) -> tuple[int, int]:
        return self.image_shape[0], self.image_shape[1]

    def backtrack_at(self, row: int, col: int) -> np.ndarray:
        """Splash edges whose vote window covers the given cell, as (m, 2)."""
        if len(self.vote_cells) == 0:
            return np.empty((0, 2), dtype=np.int64)
        hw = self.window // 2
        hit = (np.abs(self.vote_cells[:, 0] - row) <= hw) & (
            np.abs(self.vote_cells[:, 1] - col) <= hw
        )
        return self.vote_edges[hit]


@dataclass(frozen=True)
class HotspotEdges:
    """Deduplicated splash edges surviving the accumulator threshold."""

    edges: np.ndarray  # (m, 2) int, lexicographically sorted (origin, endpoint)
    threshold_used: float

    def __len__(self) -> int:
        return len(self.edges)


def build_splashes(
    desc: DescriptorSet,
    kps: KeypointSet,
    k: int = 15,
    exclusion_radius: float = 10.0,
) -> list[Splash]:
    """One splash per keypoint: its k nearest descriptors by Euclidean distance.

    Keypoints spatially closer than ``exclusion_radius`` to the splash center
    are not admissible as endpoints (they are trivially self-similar).
    Distance ties break toward the lower keypoint index. Keypoints with fewer
    than k admissible neighbours get a shorter splash.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = len(kps)
    if len(desc) != n:
        raise ValueError(f"descriptor rows ({len(desc)}) != keypoints ({n})")
    if n <= 1:
        return []

    vec = np.asarray(desc.vectors, dtype=np.float64)
    sq_norm = np.einsum("ij,ij->i", vec, vec)
    px = kps.x.astype(np.float64)
    py = kps.y.astype(np.float64)
    pos = kps.positions
    excl_sq = float(exclusion_radius) ** 2

    splashes: list[Splash] = []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d2 = sq_norm[start:stop, None] + sq_norm[None, :] - 2.0 * (vec[start:stop] @ vec.T)
        np.maximum(d2, 0.0, out=d2)
        spat = (px[start:stop, None] - px[None, :]) ** 2 + (py[start:stop, None] - py[None, :]) ** 2
        d2[spat <= excl_sq] = np.inf

        finite = np.isfinite(d2)
        counts = finite.sum(axis=1)
        for local, j in enumerate(range(start, stop)):
            m = int(min(k, counts[local]))
            if m == 0:
                splashes.append(
                    Splash(j, np.empty(0, dtype=np.int64), np.empty((0, 2), dtype=np.int64))
                )
                continue
            row = d2[local]
            kth = np.partition(row, m - 1)[m - 1]
            cand = np.nonzero(row <= kth)[0]
            order = np.lexsort((cand, row[cand]))
            chosen = cand[order[:m]]
            splashes.append(Splash(j, chosen, pos[chosen] - pos[j]))
    return splashes


def gaussian_vote_kernel(window: int, sigma: float) -> np.ndarray:
    """Square Gaussian kernel normalized to total mass 1."""
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x = np.arange(window, dtype=np.float64) - window // 2
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    kern = np.outer(g, g)
    return kern / kern.sum()


def vote(
    splashes: list[Splash],
    image_shape: tuple[int, int],
    window: int = 11,
    sigma: float | None = None,
) -> Accumulator:
    """Cast every splash endpoint into the displacement accumulator.

    Each endpoint with rank i in a splash of m endpoints adds a Gaussian
    window of total mass (m - i + 1) / m centered at the cell of its
    displacement, clipped at the grid border. The default kernel width is
    window / 6, spanning three standard deviations per side.
    """
    h, w = int(image_shape[0]), int(image_shape[1])
    if h < 1 or w < 1:
        raise ValueError(f"bad image shape {image_shape}")
    if sigma is None:
        sigma = window / 6.0
    kern = gaussian_vote_kernel(window, sigma)
    hw = window // 2

    rows_list, cols_list, weights_list, edges_list = [], [], [], []
    for s in splashes:
        m = len(s)
        if m == 0:
            continue
        dx = s.displacements[:, 0]
        dy = s.displacements[:, 1]
        if np.abs(dx).max() > w or np.abs(dy).max() > h:
            raise AssertionError("displacement outside the accumulator range")
        rows_list.append(h + dy)
        cols_list.append(w + dx)
        weights_list.append((m - s.ranks + 1) / m)
        edges_list.append(np.column_stack([np.full(m, s.center, dtype=np.int64), s.neighbors]))

    grid_h, grid_w = 2 * h + 1, 2 * w + 1
    if not rows_list:
        return Accumulator(
            np.zeros((grid_h, grid_w)),
            (h, w),
            window,
            np.empty((0, 2), dtype=np.int64),
            np.empty((0, 2), dtype=np.int64),
        )

    rows = np.concatenate(rows_list)
    cols = np.concatenate(cols_list)
    weights = np.concatenate(weights_list)
    edges = np.vstack(edges_list)

    # Accumulate into a border-padded grid, then crop: window mass falling
    # outside the true grid is dropped.
    pad_h, pad_w = grid_h + 2 * hw, grid_w + 2 * hw
    flat = np.zeros(pad_h * pad_w)
    oy, ox = np.mgrid[-hw : hw + 1, -hw : hw + 1]
    cell_offsets = (oy * pad_w + ox).ravel()
    kern_flat = kern.ravel()
    base = (rows + hw) * pad_w + (cols + hw)
    for start in range(0, len(base), _VOTE_CHUNK):
        stop = min(start + _VOTE_CHUNK, len(base))
        idx = base[start:stop, None] + cell_offsets[None, :]
        contrib = weights[start:stop, None] * kern_flat[None, :]
        flat += np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=flat.size)

    grid = flat.reshape(pad_h, pad_w)[hw : hw + grid_h, hw : hw + grid_w]
    return Accumulator(grid, (h, w), window, edges, np.column_stack([rows, cols]))


def threshold_peaks(
    acc: Accumulator, tau_mode: str = "relative", tau_value: float = 0.05
) -> HotspotEdges:
    """Backproject the splash edges supporting accumulator cells above tau.

    The threshold is ``tau_value * max(grid)`` in relative mode and
    ``tau_value`` directly in absolute mode. An edge survives when its vote
    window touches at least one cell at or above the threshold.
    """
    if tau_mode not in ("relative", "absolute"):
        raise ValueError(f"tau_mode must be 'relative' or 'absolute', got {tau_mode!r}")
    if tau_value <= 0:
        raise ValueError(f"tau_value must be > 0, got {tau_value}")
    peak = float(acc.grid.max()) if acc.grid.size else 0.0
    threshold = tau_value * peak if tau_mode == "relative" else tau_value
    if peak <= 0.0 or len(acc.vote_cells) == 0:
        return HotspotEdges(np.empty((0, 2), dtype=np.int64), threshold)

    mask = acc.grid >= threshold
    reach = ndimage.maximum_filter(mask.astype(np.uint8), size=acc.window, mode="constant")
    survived = reach[acc.vote_cells[:, 0], acc.vote_cells[:, 1]].astype(bool)
    if not survived.any():
        return HotspotEdges(np.empty((0, 2), dtype=np.int64), threshold)
    edges = np.unique(acc.vote_edges[survived], axis=0)
    return HotspotEdges(edges, threshold)


def dump_accumulator(acc: Accumulator, path) -> None:
    """Debug dump: 8-byte header (rows, cols as little-endian uint32), then
    the grid as row-major little-endian float32."""
    grid = np.ascontiguousarray(acc.grid, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", grid.shape[0], grid.shape[1]))
        fh.write(grid.tobytes())


def load_accumulator_grid(path) -> np.ndarray:
    with open(path, "rb") as fh:
        rows, cols = struct.unpack("<II", fh.read(8))
        return np.frombuffer(fh.read(rows * cols * 4), dtype="<f4").reshape(rows, cols)


def dump_peak_cells_csv(acc: Accumulator, threshold: float, path) -> None:
    """Debug dump: one ``row,col,value`` line per cell at or above threshold."""
    ys, xs = np.nonzero(acc.grid >= threshold)
    with open(path, "w", encoding="utf-8") as fh:
        for r, c in zip(ys, xs):
            fh.write(f"{r},{c},{acc.grid[r, c]!r}\n")
