"""Segmentation quality measures against a labeled ground truth.

All metrics operate on a pattern decomposition: a list of detected patterns,
each pattern a list of instances, each instance a 1-D array of flat pixel
indices. Pipeline output decomposes with one instance per member superpixel;
a bare label map decomposes with one instance per connected component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..image import check_label_map

Patterns = list  # list[list[np.ndarray]]


@dataclass(frozen=True)
class EvalReport:
    """Summary metrics for one segmentation against one ground-truth level."""

    mu_consistency: float
    avg_best_recall: float
    total_recall: float
    object_precision: float
    object_recall: float
    per_pattern: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mu_consistency": self.mu_consistency,
            "avg_best_recall": self.avg_best_recall,
            "total_recall": self.total_recall,
            "object_precision": self.object_precision,
            "object_recall": self.object_recall,
            "per_pattern": self.per_pattern,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def patterns_from_segmentation(seg) -> Patterns:
    """Decompose a pipeline SegmentationResult: instances are superpixels."""
    return seg.to_patterns()


def patterns_from_label_map(labels: np.ndarray) -> Patterns:
    """Decompose a bare label map: one pattern per nonzero label, one
    instance per 4-connected component of that label."""
    arr = check_label_map(labels)
    patterns = []
    for value in np.unique(arr):
        if value == 0:
            continue
        comp, n = ndimage.label(arr == value)
        flat = comp.ravel()
        order = np.argsort(flat, kind="stable")
        bounds = np.searchsorted(flat[order], np.arange(n + 2))
        patterns.append([order[bounds[i] : bounds[i + 1]] for i in range(1, n + 1)])
    return patterns


def _check_gt(patterns: Patterns, gt: np.ndarray) -> np.ndarray:
    arr = check_label_map(gt, name="ground truth")
    for pattern in patterns:
        for inst in pattern:
            inst = np.asarray(inst)
            if len(inst) and (inst.min() < 0 or inst.max() >= arr.size):
                raise ValueError("instance pixel index outside the ground-truth map")
    return arr


def _touched_label(inst: np.ndarray, gt_flat: np.ndarray, n_labels: int) -> int:
    """GT label of maximal pixel overlap; ties resolve to the lower label.
    Background 0 participates like any other label."""
    counts = np.bincount(gt_flat[inst], minlength=n_labels + 1)
    return int(np.argmax(counts))


def mu_consistency(patterns: Patterns, gt: np.ndarray) -> float:
    """Mean over patterns of the modal fraction of touched GT labels.

    A pattern whose instances all land on regions of one label scores 1;
    instances scattered over differently labeled regions drag the pattern
    toward 1/n. No patterns at all scores 0.
    """
    arr = _check_gt(patterns, gt)
    gt_flat = arr.ravel()
    n_labels = int(arr.max())
    scores = []
    for pattern in patterns:
        touched = [_touched_label(np.asarray(i), gt_flat, n_labels) for i in pattern if len(i)]
        if not touched:
            continue
        counts = np.bincount(touched)
        scores.append(counts.max() / len(touched))
    return float(np.mean(scores)) if scores else 0.0


def average_best_recall(patterns: Patterns, gt: np.ndarray) -> float:
    """Mean over GT labels of the pixel recall of the best-fitting pattern.

    A pattern's footprint is the union of all its instances' pixels.
    """
    arr = _check_gt(patterns, gt)
    gt_flat = arr.ravel()
    n_labels = int(arr.max())
    if n_labels == 0:
        raise ValueError("ground truth contains no labeled region")
    region_sizes = np.bincount(gt_flat, minlength=n_labels + 1)
    labels = np.nonzero(region_sizes[1:])[0] + 1

    best = np.zeros(n_labels + 1)
    for pattern in patterns:
        if not pattern:
            continue
        footprint = np.unique(np.concatenate([np.asarray(i) for i in pattern]))
        overlap = np.bincount(gt_flat[footprint], minlength=n_labels + 1)
        with np.errstate(invalid="ignore"):
            recall = np.where(region_sizes > 0, overlap / region_sizes, 0.0)
        best = np.maximum(best, recall)
    return float(np.mean(best[labels]))


def total_recall(patterns: Patterns, gt: np.ndarray, inside_fraction: float = 0.8) -> float:
    """Fraction of GT labels hit by at least one instance lying mostly
    (``inside_fraction`` of its area or more) inside that label's region."""
    arr = _check_gt(patterns, gt)
    gt_flat = arr.ravel()
    n_labels = int(arr.max())
    label_values = np.nonzero(np.bincount(gt_flat, minlength=n_labels + 1)[1:])[0] + 1
    if len(label_values) == 0:
        raise ValueError("ground truth contains no labeled region")
    hit: set[int] = set()
    for pattern in patterns:
        for inst in pattern:
            inst = np.asarray(inst)
            if not len(inst):
                continue
            counts = np.bincount(gt_flat[inst], minlength=n_labels + 1)
            for value in np.nonzero(counts[1:] / len(inst) >= inside_fraction)[0] + 1:
                hit.add(int(value))
    return len(hit) / len(label_values)


def object_precision_recall(
    patterns: Patterns, gt: np.ndarray, outside_fraction: float = 0.2
) -> tuple[float, float]:
    """Object-retrieval precision and recall under the outside-area rule.

    An instance is a true positive when at most ``outside_fraction`` of its
    area falls outside the GT object (connected component of one label) it
    best overlaps. Precision is TP over all instances; recall is the
    fraction of GT objects matched by at least one true positive.
    """
    arr = _check_gt(patterns, gt)
    objects = np.zeros_like(arr)
    n_objects = 0
    for value in np.unique(arr):
        if value == 0:
            continue
        comp, n = ndimage.label(arr == value)
        objects[comp > 0] = comp[comp > 0] + n_objects
        n_objects += n
    obj_flat = objects.ravel()

    instances = [np.asarray(i) for pattern in patterns for i in pattern if len(i)]
    if not instances or n_objects == 0:
        return 0.0, 0.0

    tp = 0
    matched: set[int] = set()
    for inst in instances:
        counts = np.bincount(obj_flat[inst], minlength=n_objects + 1)
        counts[0] = 0
        best = int(np.argmax(counts))
        if counts[best] == 0:
            continue
        outside = 1.0 - counts[best] / len(inst)
        if outside <= outside_fraction:
            tp += 1
            matched.add(best)
    return tp / len(instances), len(matched) / n_objects


def evaluate(
    patterns: Patterns,
    gt: np.ndarray,
    inside_fraction: float = 0.8,
    outside_fraction: float = 0.2,
) -> EvalReport:
    """All metrics at once, with per-pattern touched-label detail rows."""
    arr = _check_gt(patterns, gt)
    gt_flat = arr.ravel()
    n_labels = int(arr.max())
    detail = []
    for p_idx, pattern in enumerate(patterns):
        touched = [_touched_label(np.asarray(i), gt_flat, n_labels) for i in pattern if len(i)]
        consistency = float(np.bincount(touched).max() / len(touched)) if touched else 0.0
        detail.append(
            {
                "pattern": p_idx + 1,
                "n_instances": len(touched),
                "touched_labels": [int(t) for t in touched],
                "consistency": consistency,
            }
        )
    precision, obj_recall = object_precision_recall(patterns, arr, outside_fraction)
    return EvalReport(
        mu_consistency=mu_consistency(patterns, arr),
        avg_best_recall=average_best_recall(patterns, arr),
        total_recall=total_recall(patterns, arr, inside_fraction),
        object_precision=precision,
        object_recall=obj_recall,
        per_pattern=detail,
    )
