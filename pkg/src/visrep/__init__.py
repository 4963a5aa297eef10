"""Unsupervised discovery of repeating visual patterns in a single image.

The pipeline detects contour keypoints, describes them with DAISY
descriptors, matches each descriptor to its nearest neighbors, accumulates
the resulting displacement votes, and groups superpixels whose mutual
displacement evidence survives thresholding into pattern categories. The
:mod:`visrep.evaluation` subpackage provides metrics, image corruptions,
and a synthetic benchmark generator for measuring segmentation quality.
"""

from .category_graph import (
    CategoryGraph,
    Partition,
    SegmentationResult,
    build_graph,
    categories_to_mask,
    connected_components,
    corrode,
    density_score,
    extract_categories,
    partition_report,
)
from .config import PipelineConfig, load_config, save_config
from .estimator import PipelineStageError, RepetitionSegmenter, STAGES
from .features import (
    DaisyParams,
    DescriptorSet,
    KeypointSet,
    canny_edges,
    compute_daisy,
    detect_contour_keypoints,
)
from .image import (
    canonicalize_labels,
    check_image,
    check_label_map,
    load_image,
    load_label_map,
    rgb_to_lab,
    save_image,
    save_label_map,
    to_gray,
)
from .splash import (
    Accumulator,
    HotspotEdges,
    Splash,
    build_splashes,
    gaussian_vote_kernel,
    threshold_peaks,
    vote,
)
from .superpixels import SuperpixelLabeling, slic_segment

__version__ = "0.1.0"

__all__ = [
    "Accumulator",
    "CategoryGraph",
    "DaisyParams",
    "DescriptorSet",
    "HotspotEdges",
    "KeypointSet",
    "Partition",
    "PipelineConfig",
    "PipelineStageError",
    "RepetitionSegmenter",
    "STAGES",
    "SegmentationResult",
    "Splash",
    "SuperpixelLabeling",
    "build_graph",
    "build_splashes",
    "canny_edges",
    "canonicalize_labels",
    "categories_to_mask",
    "check_image",
    "check_label_map",
    "compute_daisy",
    "connected_components",
    "corrode",
    "density_score",
    "detect_contour_keypoints",
    "extract_categories",
    "gaussian_vote_kernel",
    "load_config",
    "load_image",
    "load_label_map",
    "partition_report",
    "rgb_to_lab",
    "save_config",
    "save_image",
    "save_label_map",
    "slic_segment",
    "threshold_peaks",
    "to_gray",
    "vote",
    "__version__",
]
