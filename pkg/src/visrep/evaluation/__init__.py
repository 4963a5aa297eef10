"""Evaluation toolkit: consistency/recall metrics, corruption transforms,
and the synthetic two-level benchmark generator."""

from .corrupt import CORRUPTION_KINDS, corrupt_image
from .metrics import (
    EvalReport,
    average_best_recall,
    evaluate,
    mu_consistency,
    object_precision_recall,
    patterns_from_label_map,
    patterns_from_segmentation,
    total_recall,
)
from .synthetic import GroundTruth, generate_synthetic

__all__ = [
    "CORRUPTION_KINDS",
    "EvalReport",
    "GroundTruth",
    "average_best_recall",
    "corrupt_image",
    "evaluate",
    "generate_synthetic",
    "mu_consistency",
    "object_precision_recall",
    "patterns_from_label_map",
    "patterns_from_segmentation",
    "total_recall",
]
