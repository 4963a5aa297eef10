"""Superpixel graph construction and category extraction by graph corrosion.

Surviving splash edges connect superpixels; each edge between two distinct
superpixels adds weight 1. Categories are found by repeatedly corroding the
minimum edge weight off every edge and keeping the connected-component
partition that maximizes the density score

    s(G, K) = sum_k mean_internal_weight(k) - alpha * |K|

evaluated on the corroded weights. The uncorroded graph (step 0) competes in
the argmax as well, so an already-clean dense graph is returned unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import KeypointSet
from .splash import HotspotEdges
from .superpixels import SuperpixelLabeling

_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class CategoryGraph:
    """Undirected weighted graph on superpixel ids (no self-loops)."""

    nodes: np.ndarray  # sorted unique node ids
    edges: np.ndarray  # (E, 2) int, each row (a, b) with a < b, unique rows
    weights: np.ndarray  # (E,) float > 0

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __post_init__(self):
        if len(self.weights) != len(self.edges):
            raise ValueError("edges and weights length mismatch")
        if len(self.weights) and self.weights.min() <= 0:
            raise ValueError("edge weights must be positive")
        if len(self.edges) and (self.edges[:, 0] >= self.edges[:, 1]).any():
            raise ValueError("edges must be (a, b) with a < b")


@dataclass(frozen=True)
class Partition:
    """Connected components selected by the corrosion search."""

    components: tuple  # tuple of tuples of node ids, each sorted
    score: float
    corrosion_step: int


@dataclass(frozen=True)
class SegmentationResult:
    """Per-pixel category labels plus the superpixel membership behind them.

    Each category is one extracted component; each member superpixel is one
    instance of the category's visual pattern.
    """

    label_map: np.ndarray  # (H, W) int64, category labels 1.. or 0
    categories: tuple  # tuple of tuples of member superpixel ids
    superpixel_labels: np.ndarray  # (H, W) labeling the categories were painted from

    def to_patterns(self) -> list[list[np.ndarray]]:
        """Per category, per member superpixel, the flat pixel indices."""
        flat = self.superpixel_labels.ravel()
        order = np.argsort(flat, kind="stable")
        sorted_labels = flat[order]
        bounds = np.searchsorted(sorted_labels, np.arange(flat.max() + 2))
        patterns = []
        for members in self.categories:
            patterns.append([order[bounds[m] : bounds[m + 1]] for m in members])
        return patterns


def build_graph(
    hotspots: HotspotEdges, sp: SuperpixelLabeling, kps: KeypointSet
) -> CategoryGraph:
    """Count surviving splash edges between pairs of distinct superpixels.

    Every edge whose origin and endpoint keypoints land in different
    superpixels adds 1 to that pair's weight; superpixels never touched by a
    surviving edge are left out of the graph.
    """
    if len(hotspots.edges) == 0:
        return empty_graph()
    idx = hotspots.edges
    if idx.min() < 0 or idx.max() >= len(kps):
        raise IndexError("hotspot edge references an invalid keypoint index")
    ax = kps.x[idx[:, 0]]
    ay = kps.y[idx[:, 0]]
    bx = kps.x[idx[:, 1]]
    by = kps.y[idx[:, 1]]
    a = sp.labels[ay, ax]
    b = sp.labels[by, bx]
    keep = a != b
    if not keep.any():
        return empty_graph()
    pairs = np.sort(np.stack([a[keep], b[keep]], axis=1), axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    return CategoryGraph(np.unique(uniq), uniq, counts.astype(np.float64))


def empty_graph() -> CategoryGraph:
    return CategoryGraph(
        np.empty(0, dtype=np.int64),
        np.empty((0, 2), dtype=np.int64),
        np.empty(0, dtype=np.float64),
    )


def connected_components(g: CategoryGraph) -> tuple:
    """Components of the graph (singletons included), ordered by least node."""
    index = {int(n): i for i, n in enumerate(g.nodes)}
    parent = list(range(len(g.nodes)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edges:
        ra, rb = find(index[int(a)]), find(index[int(b)])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for n in g.nodes:
        groups.setdefault(find(index[int(n)]), []).append(int(n))
    return tuple(tuple(sorted(v)) for v in sorted(groups.values(), key=min))


def density_score(g: CategoryGraph, components, alpha: float) -> float:
    """Sum of per-component average internal edge weights, minus alpha per
    component. A component with no internal edge contributes 0 to the sum."""
    comps = [frozenset(int(n) for n in k) for k in components]
    node_set = set(int(n) for n in g.nodes)
    seen: set[int] = set()
    for k in comps:
        if not k <= node_set:
            raise ValueError("component contains nodes outside the graph")
        if k & seen:
            raise ValueError("components must be disjoint")
        seen |= k
    total = 0.0
    for k in comps:
        internal = [
            w for (a, b), w in zip(g.edges, g.weights) if int(a) in k and int(b) in k
        ]
        if internal:
            total += float(np.sum(internal)) / len(internal)
    return total - alpha * len(comps)


def corrode(g: CategoryGraph) -> CategoryGraph:
    """Subtract the minimum edge weight from every edge and drop the zeros."""
    if g.n_edges == 0:
        raise ValueError("cannot corrode an edgeless graph")
    w_min = g.weights.min()
    reduced = g.weights - w_min
    keep = reduced > _WEIGHT_FLOOR
    return CategoryGraph(g.nodes, g.edges[keep], reduced[keep])


def extract_categories(g: CategoryGraph, alpha: float = 0.5) -> Partition:
    """Run the corrosion search and return the best-scoring partition.

    Evaluates the components of the uncorroded graph, then corrodes until
    fully disconnected, scoring each step's components on the corroded
    weights. Ties keep the earliest step.
    """
    if g.n_edges == 0:
        return Partition((), 0.0, 0)

    best_comps = connected_components(g)
    best_score = density_score(g, best_comps, alpha)
    best_step = 0

    current = g
    step = 0
    while current.n_edges > 0:
        step += 1
        current = corrode(current)
        comps = connected_components(current)
        score = density_score(current, comps, alpha)
        if score > best_score:
            best_score, best_comps, best_step = score, comps, step
    return Partition(best_comps, float(best_score), best_step)


def categories_to_mask(
    p: Partition, sp: SuperpixelLabeling, min_nodes: int = 2
) -> SegmentationResult:
    """Paint every component with at least ``min_nodes`` superpixels as one
    category label; everything else stays background 0."""
    cats = tuple(c for c in p.components if len(c) >= min_nodes)
    label_map = np.zeros_like(sp.labels)
    for i, members in enumerate(cats, start=1):
        label_map[np.isin(sp.labels, members)] = i
    return SegmentationResult(label_map, cats, sp.labels.copy())


def partition_report(p: Partition, min_nodes: int = 2) -> dict:
    """JSON-ready summary: score, step, and per-category superpixel ids."""
    cats = [list(map(int, c)) for c in p.components if len(c) >= min_nodes]
    return {
        "score": p.score,
        "corrosion_step": p.corrosion_step,
        "n_components": len(p.components),
        "categories": [
            {"label": i, "superpixels": members, "n_superpixels": len(members)}
            for i, members in enumerate(cats, start=1)
        ],
    }
