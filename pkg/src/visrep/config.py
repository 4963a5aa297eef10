"""Pipeline configuration: defaults, validation, and the config-file format.

The file format is sectioned ``key = value`` text (read with
:mod:`configparser`). Keys are globally unique so each one maps 1:1 onto a
command-line flag.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields, replace

# section -> keys, in file order
_SECTIONS = {
    "keypoints": ("keypoint_budget", "canny_low", "canny_high"),
    "descriptor": ("daisy_radius",),
    "matching": ("knn", "exclusion_radius"),
    "voting": ("vote_window", "tau_mode", "tau"),
    "superpixels": ("superpixel_count", "compactness", "slic_iterations"),
    "categories": ("alpha", "min_category_nodes"),
    "random": ("seed",),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for the full discovery pipeline.

    Defaults reproduce the reference setting: 9000 keypoints, 15 nearest
    neighbours, descriptor radius 30, an 11x11 vote window, 150 superpixels,
    and peak thresholding at 0.05 * max of the accumulator.
    """

    keypoint_budget: int = 9000
    canny_low: float = 50.0
    canny_high: float = 150.0
    daisy_radius: int = 30
    knn: int = 15
    exclusion_radius: float = 10.0
    vote_window: int = 11
    tau_mode: str = "relative"
    tau: float = 0.05
    superpixel_count: int = 150
    compactness: float = 10.0
    slic_iterations: int = 10
    alpha: float = 0.5
    min_category_nodes: int = 2
    seed: int = 0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))

    def problems(self) -> list[str]:
        """Return a description of every violated field bound (empty if valid)."""
        out = []
        if self.keypoint_budget < 1:
            out.append(f"keypoint_budget must be >= 1, got {self.keypoint_budget}")
        if not 0 < self.canny_low < self.canny_high:
            out.append(f"need 0 < canny_low < canny_high, got {self.canny_low}/{self.canny_high}")
        if self.daisy_radius < 1:
            out.append(f"daisy_radius must be >= 1, got {self.daisy_radius}")
        if self.knn < 1:
            out.append(f"knn must be >= 1, got {self.knn}")
        if self.exclusion_radius <= 0:
            out.append(f"exclusion_radius must be > 0, got {self.exclusion_radius}")
        if self.vote_window < 3 or self.vote_window % 2 == 0:
            out.append(f"vote_window must be odd and >= 3, got {self.vote_window}")
        if self.tau_mode not in ("relative", "absolute"):
            out.append(f"tau_mode must be 'relative' or 'absolute', got {self.tau_mode!r}")
        if self.tau <= 0:
            out.append(f"tau must be > 0, got {self.tau}")
        if self.superpixel_count < 2:
            out.append(f"superpixel_count must be >= 2, got {self.superpixel_count}")
        if self.compactness <= 0:
            out.append(f"compactness must be > 0, got {self.compactness}")
        if self.slic_iterations < 1:
            out.append(f"slic_iterations must be >= 1, got {self.slic_iterations}")
        if self.alpha < 0:
            out.append(f"alpha must be >= 0, got {self.alpha}")
        if self.min_category_nodes < 1:
            out.append(f"min_category_nodes must be >= 1, got {self.min_category_nodes}")
        return out

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        """New config with the given fields replaced (validated again)."""
        return replace(self, **kwargs)


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse_value(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    return raw


def save_config(cfg: PipelineConfig, path) -> None:
    parser = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        parser[section] = {k: str(getattr(cfg, k)) for k in keys}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def load_config(path) -> PipelineConfig:
    """Read a config file; missing keys keep their defaults, unknown keys fail."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"file not found: {path}")
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    overrides = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}] in {path}")
        for key, raw in parser[section].items():
            if key not in _SECTIONS[section]:
                raise ValueError(f"unknown config key {key!r} in [{section}] of {path}")
            try:
                overrides[key] = _parse_value(key, raw)
            except ValueError as exc:
                raise ValueError(f"bad value for {key!r} in {path}: {raw!r}") from exc
    return PipelineConfig(**overrides)
