"""Command-line surface: rasterize, augment, evaluate, change, synth,
losscheck.

Exit codes: 0 success, 1 usage/validation failure, 2 I/O failure. All
machine-readable outputs are deterministic given the inputs and --seed;
floats are printed with 6 significant digits. SLUMKIT_JOBS sets the default
for --jobs where supported.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .change import detect_change, scene_union_mask, write_change_map_png
from .dataset import (
    Dataset,
    Detection,
    InstanceAnnotation,
    Scale,
    Scene,
    load_dataset,
    load_predictions,
    resolve_image_path,
    save_dataset,
)
from .errors import ImageLoadError, SlumkitError, ValidationError
from .ioutils import load_image, read_json, save_image, write_json
from .losses import gradcheck_sample, random_sample
from .metrics import evaluate
from .raster import RleMask, rasterize_polygon
from .synth import SynthConfig, write_corpus
from .transforms import AugmentConfig, augment


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SLUMKIT_JOBS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slumkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"slumkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rasterize", help="write one PNG mask per annotation")
    p.add_argument("--gt", required=True, help="dataset JSON")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("augment", help="augment scenes and their annotations")
    p.add_argument("--gt", required=True, help="dataset JSON (scene images must exist)")
    p.add_argument("--config", required=True, help="augmentation config JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--gt", required=True, help="dataset JSON")
    p.add_argument("--pred", required=True, help="prediction JSON")
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--score-floor", type=float, default=0.5)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", help="also write a per-scene CSV report")
    p.add_argument("--pr-csv", help="also write the precision-recall curve CSV")
    p.add_argument("--jobs", type=int, default=_default_jobs())

    p = sub.add_parser("change", help="percentage change between two prediction sets")
    p.add_argument("--before", required=True, help="earlier prediction JSON")
    p.add_argument("--after", required=True, help="later prediction JSON")
    p.add_argument("--scene", required=True, help="scene id present in both")
    p.add_argument("--score-floor", type=float, default=0.5)
    p.add_argument("--map", dest="map_png", help="write the change map PNG here")
    p.add_argument("--out", help="write the change summary JSON here")

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("losscheck", help="finite-difference check of the loss kernels")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_rasterize(args) -> int:
    ds = load_dataset(args.gt)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for scene in ds.scenes:
        for i, ann in enumerate(ds.annotations_for(scene.id)):
            mask = rasterize_polygon(ann.polygon, scene.width, scene.height)
            save_image(
                out / f"{scene.id}_{i:03d}.png",
                (mask * np.uint8(255)).astype(np.uint8),
            )
            count += 1
    print(f"wrote {count} masks to {out}")
    return 0


def cmd_augment(args) -> int:
    ds = load_dataset(args.gt)
    config = AugmentConfig.from_dict(read_json(args.config))
    # validate every input path before the first write
    for scene in ds.scenes:
        path = resolve_image_path(args.gt, scene)
        if not path.is_file():
            raise ImageLoadError(f"scene {scene.id!r}: missing image {path}")
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(args.seed).spawn(len(ds.scenes))
    new_scenes, new_annotations = [], []
    for scene, child in zip(ds.scenes, seeds):
        image = load_image(resolve_image_path(args.gt, scene))
        polys = [a.polygon for a in ds.annotations_for(scene.id)]
        image2, polys2 = augment(
            image, polys, config, seed=int(child.generate_state(1)[0])
        )
        scene2 = Scene(
            id=scene.id,
            image_path=f"images/{scene.id}.png",
            width=scene.width,
            height=scene.height,
            scale=scene.scale,
            capture_year=scene.capture_year,
        )
        save_image(out / scene2.image_path, image2)
        new_scenes.append(scene2)
        for ann, poly in zip(ds.annotations_for(scene.id), polys2):
            new_annotations.append(
                InstanceAnnotation(
                    scene_id=scene.id, polygon=poly, category=ann.category
                )
            )
    save_dataset(out / "dataset.json", Dataset(
        scenes=new_scenes, annotations=new_annotations, split=ds.split
    ))
    print(f"augmented {len(new_scenes)} scenes into {out}")
    return 0


def cmd_evaluate(args) -> int:
    ds = load_dataset(args.gt)
    preds = load_predictions(args.pred, ds)
    report = evaluate(
        ds,
        preds,
        threshold=args.iou_thresh,
        score_floor=args.score_floor,
        jobs=args.jobs,
    )
    report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    if args.pr_csv:
        report.pr.write_csv(args.pr_csv)
    print(f"scenes: {len(report.per_scene)}  gt: {report.tp + report.fn}  "
          f"detections: {report.tp + report.fp}")
    print(f"ap50: {report.ap50:.6g}")
    print(f"union_iou: {report.union_iou:.6g}")
    print(f"mean_matched_iou: {report.mean_matched_iou:.6g}")
    print(f"tp: {report.tp}  fp: {report.fp}  fn: {report.fn}")
    return 0


def _union_for_scene(path: str, scene_id: str, score_floor: float, shape):
    """Union mask of one scene's detections from a standalone prediction file;
    None when the scene has no detections and no shape is known."""
    doc = read_json(path)
    if not isinstance(doc, list):
        raise ValidationError(f"{path}: top level must be a list")
    dets = []
    for i, raw in enumerate(doc):
        if raw.get("scene_id") != scene_id:
            continue
        score = float(raw["score"])
        if not 0.0 <= score <= 1.0:
            raise ValidationError(f"{path}[{i}]: score {score} outside [0, 1]")
        m = raw["mask"]
        dets.append(
            Detection(
                scene_id=scene_id,
                mask=RleMask(width=int(m["width"]), height=int(m["height"]),
                             runs=list(m["runs"])),
                score=score,
                category=str(raw.get("category", "slum")),
            )
        )
    if not dets and shape is None:
        return None
    return scene_union_mask(dets, score_floor=score_floor, shape=shape)


def cmd_change(args) -> int:
    mask_before = _union_for_scene(args.before, args.scene, args.score_floor, None)
    shape = mask_before.shape if mask_before is not None else None
    mask_after = _union_for_scene(args.after, args.scene, args.score_floor, shape)
    if mask_after is not None and mask_before is None:
        mask_before = np.zeros(mask_after.shape, dtype=bool)
    if mask_before is None and mask_after is None:
        raise ValidationError(
            f"scene {args.scene!r} has no detections in either file; "
            "mask dimensions are unknown"
        )
    result = detect_change(mask_before, mask_after)
    print(f"before_px: {result.area_before}")
    print(f"after_px: {result.area_after}")
    if result.percent_change is not None:
        print(f"percent: {result.percent_change:+.2f}")
    print(f"status: {result.status.value}")
    if args.out:
        result.write_json(args.out)
    if args.map_png:
        write_change_map_png(args.map_png, result.change_map)
    return 0


def cmd_synth(args) -> int:
    doc = read_json(args.config)
    if not isinstance(doc, dict):
        raise ValidationError(f"{args.config}: top level must be an object")
    n_scenes = int(doc.pop("n_scenes", 1))
    known = {
        "width", "height", "n_instances", "vertices_per_instance",
        "instance_radius", "texture_contrast", "growth_factor",
        "scale", "capture_year",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown synth config keys: {sorted(unknown)}")
    kwargs = dict(doc)
    for key in ("n_instances", "vertices_per_instance", "instance_radius"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if "scale" in kwargs:
        try:
            kwargs["scale"] = Scale(kwargs["scale"])
        except ValueError:
            raise ValidationError(f"bad scale tag {kwargs['scale']!r}") from None
    cfg = SynthConfig(**kwargs)
    paths = write_corpus(cfg, seed=args.seed, out_dir=args.out, n_scenes=n_scenes)
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_losscheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = []
    all_pass = True
    for name in ("mask", "cls", "box"):
        worst = 0.0
        for _ in range(args.trials):
            sample = random_sample(rng, num_classes=2, mask_size=4)
            worst = max(worst, gradcheck_sample(name, sample))
        ok = worst <= 1e-5
        all_pass &= ok
        rows.append((name, worst, ok))
    print(f"{'kernel':<8} {'max rel err':>12}  result")
    for name, worst, ok in rows:
        print(f"{name:<8} {worst:>12.3e}  {'PASS' if ok else 'FAIL'}")
    return 0 if all_pass else 1


_COMMANDS = {
    "rasterize": cmd_rasterize,
    "augment": cmd_augment,
    "evaluate": cmd_evaluate,
    "change": cmd_change,
    "synth": cmd_synth,
    "losscheck": cmd_losscheck,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ImageLoadError as exc:
        print(f"slumkit: i/o error: {exc}", file=sys.stderr)
        return 2
    except SlumkitError as exc:
        print(f"slumkit: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"slumkit: i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
