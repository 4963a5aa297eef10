"""Scikit-learn style front end for the full discovery pipeline.

``RepetitionSegmenter.fit`` takes a single image and runs keypoint
extraction, descriptor matching, accumulator voting, superpixel
segmentation, and category extraction, leaving every intermediate artifact
on the estimator. ``fit_predict`` returns the per-pixel category label map.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator

from .category_graph import build_graph, categories_to_mask, extract_categories
from .config import PipelineConfig
from .features import DaisyParams, compute_daisy, detect_contour_keypoints
from .image import check_image
from .splash import build_splashes, threshold_peaks, vote
from .superpixels import slic_segment

STAGES = ("keypoints", "descriptors", "splashes", "voting", "superpixels", "categories")


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names the culprit."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class RepetitionSegmenter(BaseEstimator):
    """Unsupervised segmentation of repeating visual patterns in one image.

    Parameters mirror :class:`~visrep.config.PipelineConfig` one to one, so
    a config file round-trips through ``get_params``/``set_params``.

    Attributes set by ``fit``: ``keypoints_``, ``descriptors_``,
    ``splashes_``, ``accumulator_``, ``hotspots_``, ``superpixels_``,
    ``graph_``, ``partition_``, ``segmentation_``, ``labels_``,
    ``n_categories_``, and per-stage ``timings_`` in seconds.
    """

    def __init__(
        self,
        keypoint_budget: int = 9000,
        canny_low: float = 50.0,
        canny_high: float = 150.0,
        daisy_radius: int = 30,
        knn: int = 15,
        exclusion_radius: float = 10.0,
        vote_window: int = 11,
        tau_mode: str = "relative",
        tau: float = 0.05,
        superpixel_count: int = 150,
        compactness: float = 10.0,
        slic_iterations: int = 10,
        alpha: float = 0.5,
        min_category_nodes: int = 2,
        seed: int = 0,
    ):
        self.keypoint_budget = keypoint_budget
        self.canny_low = canny_low
        self.canny_high = canny_high
        self.daisy_radius = daisy_radius
        self.knn = knn
        self.exclusion_radius = exclusion_radius
        self.vote_window = vote_window
        self.tau_mode = tau_mode
        self.tau = tau
        self.superpixel_count = superpixel_count
        self.compactness = compactness
        self.slic_iterations = slic_iterations
        self.alpha = alpha
        self.min_category_nodes = min_category_nodes
        self.seed = seed

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> "RepetitionSegmenter":
        return cls(**{k: getattr(cfg, k) for k in cls().get_params()})

    def to_config(self) -> PipelineConfig:
        """Validates the current parameters as a side effect."""
        return PipelineConfig(**self.get_params())

    def fit(self, X, y=None) -> "RepetitionSegmenter":
        """Run the whole pipeline on one image (2-D gray or 3-D color array)."""
        cfg = self.to_config()
        img = check_image(X)
        timings: dict[str, float] = {}

        def run(stage, fn):
            t0 = time.perf_counter()
            try:
                result = fn()
            except Exception as exc:
                raise PipelineStageError(stage, exc) from exc
            timings[stage] = timings.get(stage, 0.0) + (time.perf_counter() - t0)
            return result

        self.keypoints_ = run(
            "keypoints",
            lambda: detect_contour_keypoints(
                img,
                canny_low=cfg.canny_low,
                canny_high=cfg.canny_high,
                budget=cfg.keypoint_budget,
                border_margin=cfg.daisy_radius,
            ),
        )
        params = DaisyParams(radius=cfg.daisy_radius)
        self.descriptors_ = run(
            "descriptors", lambda: compute_daisy(img, self.keypoints_, params)
        )
        self.splashes_ = run(
            "splashes",
            lambda: build_splashes(
                self.descriptors_, self.keypoints_, cfg.knn, cfg.exclusion_radius
            ),
        )
        self.accumulator_ = run(
            "voting", lambda: vote(self.splashes_, img.shape[:2], cfg.vote_window)
        )
        self.hotspots_ = run(
            "voting", lambda: threshold_peaks(self.accumulator_, cfg.tau_mode, cfg.tau)
        )
        self.superpixels_ = run(
            "superpixels",
            lambda: slic_segment(
                img, cfg.superpixel_count, cfg.compactness, cfg.slic_iterations
            ),
        )

        def categories():
            graph = build_graph(self.hotspots_, self.superpixels_, self.keypoints_)
            partition = extract_categories(graph, cfg.alpha)
            return graph, partition, categories_to_mask(
                partition, self.superpixels_, cfg.min_category_nodes
            )

        self.graph_, self.partition_, self.segmentation_ = run("categories", categories)
        self.labels_ = self.segmentation_.label_map
        self.n_categories_ = len(self.segmentation_.categories)
        self.timings_ = timings
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_
