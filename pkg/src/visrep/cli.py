"""Command-line front end: run, eval, synth, corrupt, and bench subcommands.

Exit codes: 0 on success, 1 when a pipeline stage fails, 2 for usage or
I/O problems. All artifact files are written atomically (temp file then
rename) so a crashed run never leaves a truncated output behind.
"""

from __future__ import annotations

import argparse
import colorsys
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .config import PipelineConfig, load_config
from .estimator import PipelineStageError, RepetitionSegmenter
from .evaluation import (
    CORRUPTION_KINDS,
    corrupt_image,
    evaluate,
    generate_synthetic,
    patterns_from_label_map,
    patterns_from_segmentation,
)
from .category_graph import partition_report
from .image import check_image, load_image, load_label_map, save_image, save_label_map, to_gray

_CONFIG_FIELDS = {f.name: type(getattr(PipelineConfig(), f.name)) for f in fields(PipelineConfig)}
_GT_SUFFIXES = ("_L1", "_L2")


def _atomic(path: Path, writer) -> None:
    """Write via ``writer(tmp_path)`` then rename into place.

    The temp name keeps the real suffix so format-sniffing writers work.
    """
    tmp = path.with_name(path.stem + ".tmp" + path.suffix)
    writer(tmp)
    os.replace(tmp, path)


def _write_json(payload: dict, path: Path) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    _atomic(path, lambda p: p.write_text(text, encoding="utf-8"))


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline parameters", "override any config key")
    group.add_argument("--config", type=Path, default=None, help="INI config file")
    for name, kind in _CONFIG_FIELDS.items():
        flag = "--" + name.replace("_", "-")
        group.add_argument(flag, dest=name, type=kind, default=None, metavar=kind.__name__.upper())


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return cfg.with_overrides(**overrides) if overrides else cfg


def _category_color(index: int) -> np.ndarray:
    # Golden-ratio hue steps keep neighboring category colors far apart.
    hue = (index - 1) * 0.6180339887498949 % 1.0
    return np.array(colorsys.hsv_to_rgb(hue, 0.85, 1.0)) * 255.0


def _overlay(img: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Blend category colors over a grayscale copy of the input."""
    gray = to_gray(check_image(img))
    out = np.repeat(gray[:, :, None], 3, axis=2)
    for label in np.unique(labels):
        if label == 0:
            continue
        mask = labels == label
        out[mask] = 0.45 * out[mask] + 0.55 * _category_color(int(label))
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def _looks_like_label_map(path: Path) -> bool:
    try:
        from PIL import Image

        with Image.open(path) as im:
            return im.mode in ("I", "I;16", "L", "P")
    except OSError:
        return False


def _resolve_gt(gt_arg: str, level: int) -> Path:
    """Accept an exact label-map path, the base image path, or a bare prefix.

    A color image given here stands for its ``_L<level>`` sibling, so
    ``eval mask.png scene.png --level 2`` finds ``scene_L2.png``.
    """
    path = Path(gt_arg)
    if path.is_file() and _looks_like_label_map(path):
        return path
    if path.suffix:
        sibling = path.with_name(f"{path.stem}_L{level}{path.suffix}")
    else:
        sibling = path.with_name(f"{path.name}_L{level}.png")
    if sibling.is_file():
        return sibling
    raise FileNotFoundError(f"file not found: {sibling}")


def cmd_run(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    cfg = _config_from_args(args)
    est = RepetitionSegmenter.from_config(cfg).fit(img)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _atomic(outdir / "mask.png", lambda p: save_label_map(est.labels_, p))
    _atomic(outdir / "overlay.png", lambda p: save_image(_overlay(img, est.labels_), p))
    report = {
        "image": str(args.image),
        "image_shape": list(est.labels_.shape),
        "config": asdict(cfg),
        "n_keypoints": len(est.keypoints_),
        "n_splashes": len(est.splashes_),
        "threshold": est.hotspots_.threshold_used,
        "n_hotspot_edges": len(est.hotspots_),
        "n_superpixels": est.superpixels_.count,
        "partition": partition_report(est.partition_, cfg.min_category_nodes),
    }
    _write_json(report, outdir / "report.json")
    _write_json({k: round(v, 6) for k, v in est.timings_.items()}, outdir / "timings.json")
    n_cats = len(report["partition"]["categories"])
    print(f"wrote {outdir}: {n_cats} categories, {est.superpixels_.count} superpixels")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    mask = load_label_map(args.mask)
    gt = load_label_map(_resolve_gt(args.gt, args.level))
    if gt.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match ground truth {gt.shape}")
    patterns = patterns_from_label_map(mask)
    report = evaluate(patterns, gt, args.inside_fraction, args.outside_fraction)
    text = report.to_json()
    print(text)
    if args.out:
        _atomic(Path(args.out), lambda p: p.write_text(text + "\n", encoding="utf-8"))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        width, height = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise ValueError(f"--size must look like 384x384, got {args.size!r}") from None
    img, gt = generate_synthetic(
        n_motifs=args.motifs,
        n_instances=args.instances,
        size=(height, width),
        jitter=args.jitter,
        noise=args.noise,
        seed=args.seed,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    base = outdir / f"{args.name}.png"
    _atomic(base, lambda p: save_image(img, p))
    for level in (1, 2):
        dest = outdir / f"{args.name}_L{level}.png"
        _atomic(dest, lambda p, lv=level: save_label_map(gt.level(lv), p))
    print(f"wrote {base} and ground-truth levels L1, L2")
    return 0


def cmd_corrupt(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    out = corrupt_image(img, args.kind, seed=args.seed)
    dest = Path(args.out)
    dest.parent.mkdir(parents=True, exist_ok=True)
    _atomic(dest, lambda p: save_image(out, p))
    print(f"wrote {dest} ({args.kind})")
    return 0


def _parse_sweep(spec: str) -> tuple[str, list]:
    key, sep, rest = spec.partition("=")
    key = key.strip()
    if not sep or key not in _CONFIG_FIELDS:
        valid = ", ".join(sorted(_CONFIG_FIELDS))
        raise ValueError(f"--sweep expects KEY=V1,V2,... with KEY one of: {valid}")
    kind = _CONFIG_FIELDS[key]
    try:
        values = [kind(v.strip()) for v in rest.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"--sweep {key}: values must parse as {kind.__name__}") from None
    if not values:
        raise ValueError(f"--sweep {key}: no values given")
    return key, values


def _bench_scenes(directory: Path, level: int) -> list[tuple[Path, Path]]:
    if not directory.is_dir():
        raise FileNotFoundError(f"file not found: {directory}")
    pairs = []
    for img_path in sorted(directory.glob("*.png")):
        if img_path.stem.endswith(_GT_SUFFIXES):
            continue
        gt_path = img_path.with_name(f"{img_path.stem}_L{level}.png")
        if not gt_path.is_file():
            print(f"skipping {img_path.name}: no {gt_path.name}", file=sys.stderr)
            continue
        pairs.append((img_path, gt_path))
    if not pairs:
        raise FileNotFoundError(f"no image/ground-truth pairs in {directory}")
    return pairs


def cmd_bench(args: argparse.Namespace) -> int:
    base_cfg = _config_from_args(args)
    scenes = _bench_scenes(Path(args.images), args.level)
    sweeps = [_parse_sweep(s) for s in args.sweep] if args.sweep else [("none", [None])]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["param", "value", "mu_consistency", "avg_best_recall", "total_recall", "runtime_ms"]
    )
    for key, values in sweeps:
        for value in values:
            cfg = base_cfg if value is None else base_cfg.with_overrides(**{key: value})
            mu, best, total, ms = [], [], [], []
            for img_path, gt_path in scenes:
                img = load_image(img_path)
                gt = load_label_map(gt_path)
                t0 = time.perf_counter()
                est = RepetitionSegmenter.from_config(cfg).fit(img)
                ms.append((time.perf_counter() - t0) * 1000.0)
                rep = evaluate(patterns_from_segmentation(est.segmentation_), gt)
                mu.append(rep.mu_consistency)
                best.append(rep.avg_best_recall)
                total.append(rep.total_recall)
            writer.writerow(
                [
                    key,
                    "default" if value is None else value,
                    f"{np.mean(mu):.6f}",
                    f"{np.mean(best):.6f}",
                    f"{np.mean(total):.6f}",
                    f"{np.mean(ms):.1f}",
                ]
            )
    text = buf.getvalue()
    print(text, end="")
    if args.out:
        _atomic(Path(args.out), lambda p: p.write_text(text, encoding="utf-8"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visrep",
        description="Discover repeating visual patterns in a single image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="segment one image and write artifacts")
    p_run.add_argument("image", type=Path, help="input image (PNG/JPEG)")
    p_run.add_argument("--out", type=Path, required=True, help="output directory")
    _add_config_flags(p_run)
    p_run.set_defaults(handler=cmd_run)

    p_eval = sub.add_parser("eval", help="score a mask against ground truth")
    p_eval.add_argument("mask", type=Path, help="predicted label map (16-bit PNG)")
    p_eval.add_argument("gt", help="ground-truth label map, or base path resolved via _L<level>")
    p_eval.add_argument("--level", type=int, default=2, choices=(1, 2))
    p_eval.add_argument("--inside-fraction", type=float, default=0.8)
    p_eval.add_argument("--outside-fraction", type=float, default=0.2)
    p_eval.add_argument("--out", type=Path, default=None, help="also write the JSON report here")
    p_eval.set_defaults(handler=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark scene")
    p_synth.add_argument("--out", type=Path, required=True, help="output directory")
    p_synth.add_argument("--name", default="scene")
    p_synth.add_argument("--motifs", type=int, default=3)
    p_synth.add_argument("--instances", type=int, default=12)
    p_synth.add_argument("--size", default="384x384", help="canvas WxH in pixels")
    p_synth.add_argument("--jitter", type=int, default=4)
    p_synth.add_argument("--noise", type=float, default=0.02)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(handler=cmd_synth)

    p_cor = sub.add_parser("corrupt", help="apply a photometric corruption")
    p_cor.add_argument("image", type=Path)
    p_cor.add_argument("kind", choices=CORRUPTION_KINDS)
    p_cor.add_argument("--out", type=Path, required=True)
    p_cor.add_argument("--seed", type=int, default=0)
    p_cor.set_defaults(handler=cmd_corrupt)

    p_bench = sub.add_parser("bench", help="run + eval every scene in a directory")
    p_bench.add_argument("images", type=Path, help="directory of scene PNGs with _L<level> maps")
    p_bench.add_argument("--level", type=int, default=2, choices=(1, 2))
    p_bench.add_argument(
        "--sweep",
        action="append",
        default=None,
        metavar="KEY=V1,V2",
        help="sweep a config key over values; repeatable",
    )
    p_bench.add_argument("--out", type=Path, default=None, help="write the CSV here as well")
    _add_config_flags(p_bench)
    p_bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
