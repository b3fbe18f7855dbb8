"""Mask IoU, detection-to-ground-truth matching, precision-recall, and AP.

Evaluation follows the usual single-class protocol: detections are processed
in descending confidence, each one greedily claims the still-unmatched ground
truth with the highest mask IoU when that IoU clears the threshold, and
average precision is the area under the monotone precision envelope of the
pooled precision-recall points (all-point interpolation, no 101-point
sampling). AP is reported as a percentage.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, Detection, gt_masks
from .errors import DimensionMismatch
from .ioutils import sig6, write_json
from .raster import rle_decode

__all__ = [
    "pairwise_iou",
    "match_detections",
    "pr_curve",
    "average_precision",
    "union_iou",
    "evaluate",
    "DetectionRecord",
    "MatchResult",
    "PrCurve",
    "SceneEval",
    "EvalReport",
]


def pairwise_iou(a: np.ndarray, b: np.ndarray) -> float:
    """|a & b| / |a | b|, with 0.0 when both masks are empty."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(a & b)) / union


@dataclass
class DetectionRecord:
    """Outcome for one detection after matching."""

    index: int  # position in the input detection list
    score: float
    matched: bool
    matched_gt_index: Optional[int]
    iou_at_match: Optional[float]
    scene_id: Optional[str] = None


@dataclass
class MatchResult:
    """Per-scene matching outcome; records are in processing order
    (descending score, input order on ties)."""

    records: list[DetectionRecord]
    n_gt: int
    n_unmatched_gt: int


def match_detections(
    gt: Sequence[np.ndarray],
    det: Sequence[tuple[np.ndarray, float]],
    threshold: float = 0.5,
    scene_id: Optional[str] = None,
) -> MatchResult:
    """Greedily match detections to ground truth at the given IoU threshold.

    Detections are processed in descending score (input order breaks ties);
    each claims the unmatched GT with the highest IoU if that IoU >= threshold
    (first index wins IoU ties), otherwise it is a false positive. Unmatched
    GT masks are false negatives.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    shapes = {m.shape for m in gt} | {d[0].shape for d in det}
    if len(shapes) > 1:
        raise DimensionMismatch(f"masks must share scene dimensions, got {shapes}")

    order = sorted(range(len(det)), key=lambda i: -det[i][1])
    taken = np.zeros(len(gt), dtype=bool)
    records = []
    for i in order:
        mask, score = det[i]
        best_gt, best_iou = None, -1.0
        for g, gt_mask in enumerate(gt):
            if taken[g]:
                continue
            iou = pairwise_iou(mask, gt_mask)
            if iou > best_iou:
                best_gt, best_iou = g, iou
        if best_gt is not None and best_iou >= threshold:
            taken[best_gt] = True
            records.append(
                DetectionRecord(
                    index=i, score=score, matched=True,
                    matched_gt_index=best_gt, iou_at_match=best_iou,
                    scene_id=scene_id,
                )
            )
        else:
            records.append(
                DetectionRecord(
                    index=i, score=score, matched=False,
                    matched_gt_index=None, iou_at_match=None, scene_id=scene_id,
                )
            )
    return MatchResult(
        records=records, n_gt=len(gt), n_unmatched_gt=int((~taken).sum())
    )


@dataclass
class PrCurve:
    """One (recall, precision) point per pooled detection, descending score."""

    scores: np.ndarray
    precision: np.ndarray
    recall: np.ndarray

    def __len__(self) -> int:
        return len(self.scores)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["score", "precision", "recall"])
            for s, p, r in zip(self.scores, self.precision, self.recall):
                w.writerow([f"{s:.6g}", f"{p:.6g}", f"{r:.6g}"])


def pr_curve(matches: Sequence[MatchResult], total_gt: int) -> PrCurve:
    """Pool records across scenes, sort by descending score (stable), and
    accumulate precision/recall. Recall is 0 when there is no ground truth."""
    if total_gt < 0:
        raise ValueError("total_gt must be >= 0")
    pooled = [rec for m in matches for rec in m.records]
    pooled.sort(key=lambda r: -r.score)
    n = len(pooled)
    tp_flags = np.array([r.matched for r in pooled], dtype=np.int64)
    tp_cum = np.cumsum(tp_flags) if n else np.zeros(0, dtype=np.int64)
    ranks = np.arange(1, n + 1)
    precision = tp_cum / ranks if n else np.zeros(0)
    recall = tp_cum / total_gt if total_gt > 0 else np.zeros(n)
    return PrCurve(
        scores=np.array([r.score for r in pooled], dtype=np.float64),
        precision=np.asarray(precision, dtype=np.float64),
        recall=np.asarray(recall, dtype=np.float64),
    )


def average_precision(curve: PrCurve) -> float:
    """Area under the monotone precision envelope, as a percentage.

    AP = sum_i (r_i - r_{i-1}) * max_{j >= i} precision_j, r_0 = 0. An empty
    curve scores 0.
    """
    if len(curve) == 0:
        return 0.0
    envelope = np.maximum.accumulate(curve.precision[::-1])[::-1]
    deltas = np.diff(np.concatenate([[0.0], curve.recall]))
    return float(np.sum(deltas * envelope) * 100.0)


def union_iou(gt: Sequence[np.ndarray], det: Sequence[np.ndarray]) -> float:
    """IoU between the pixel-wise union of all GT masks and of all detection
    masks. Symmetric in its arguments."""
    masks = list(gt) + list(det)
    if masks:
        shape = masks[0].shape
        if any(m.shape != shape for m in masks):
            raise DimensionMismatch("all masks must share scene dimensions")
    else:
        return 0.0
    gt_union = np.zeros(shape, dtype=bool)
    for m in gt:
        gt_union |= m
    det_union = np.zeros(shape, dtype=bool)
    for m in det:
        det_union |= m
    return pairwise_iou(gt_union, det_union)


@dataclass
class SceneEval:
    scene_id: str
    n_gt: int
    n_det: int
    tp: int
    fp: int
    fn: int
    union_iou: float


@dataclass
class EvalReport:
    """Dataset-level evaluation summary.

    ap50 is a percentage in [0, 100]. union_iou pools pixels across scenes
    (sum of per-scene intersections over sum of per-scene unions) between
    score-thresholded detection unions and GT unions; mean_matched_iou
    averages the IoU of matched detections. Both IoU readings are reported
    because a single scene-level "IoU" figure is ambiguous between them.
    """

    ap50: float
    union_iou: float
    mean_matched_iou: float
    tp: int
    fp: int
    fn: int
    per_scene: list[SceneEval]
    pr: PrCurve = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "ap50": sig6(self.ap50),
            "union_iou": sig6(self.union_iou),
            "mean_matched_iou": sig6(self.mean_matched_iou),
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_scene": [
                {
                    "scene_id": s.scene_id,
                    "n_gt": s.n_gt,
                    "n_det": s.n_det,
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                    "union_iou": sig6(s.union_iou),
                }
                for s in self.per_scene
            ],
        }

    def write_json(self, path: str | Path) -> None:
        write_json(path, self.to_dict())

    def write_csv(self, path: str | Path) -> None:
        """One row per scene plus a totals row."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scene_id", "n_gt", "n_det", "tp", "fp", "fn", "union_iou"])
            for s in self.per_scene:
                w.writerow(
                    [s.scene_id, s.n_gt, s.n_det, s.tp, s.fp, s.fn,
                     f"{s.union_iou:.6g}"]
                )
            w.writerow(
                ["TOTAL", self.tp + self.fn, self.tp + self.fp, self.tp,
                 self.fp, self.fn, f"{self.union_iou:.6g}"]
            )


def evaluate(
    ds: Dataset,
    preds: Sequence[Detection],
    threshold: float = 0.5,
    score_floor: float = 0.5,
    jobs: int = 1,
) -> EvalReport:
    """Evaluate predictions against a dataset's ground truth.

    AP and matching use every detection regardless of score; the pixel-level
    union IoU first drops detections with score < score_floor, since a mask
    union needs a hard accept decision. Scenes are independent, so jobs > 1
    fans them out to a thread pool; aggregation follows dataset scene order
    either way.
    """
    by_scene: dict[str, list[Detection]] = {s.id: [] for s in ds.scenes}
    for det in preds:
        by_scene[det.scene_id].append(det)

    def eval_one(scene) -> tuple[MatchResult, SceneEval, int, int]:
        gt = gt_masks(ds, scene.id)
        dets = by_scene[scene.id]
        pairs = [(rle_decode(d.mask), d.score) for d in dets]
        match = match_detections(
            gt, pairs, threshold=threshold, scene_id=scene.id
        )
        shape = (scene.height, scene.width)
        gt_union = np.zeros(shape, dtype=bool)
        for m in gt:
            gt_union |= m
        det_union = np.zeros(shape, dtype=bool)
        for mask, score in pairs:
            if score >= score_floor:
                det_union |= mask
        inter_px = int(np.count_nonzero(gt_union & det_union))
        union_px = int(np.count_nonzero(gt_union | det_union))
        tp = sum(r.matched for r in match.records)
        scene_eval = SceneEval(
            scene_id=scene.id,
            n_gt=len(gt),
            n_det=len(dets),
            tp=tp,
            fp=len(dets) - tp,
            fn=match.n_unmatched_gt,
            union_iou=0.0 if union_px == 0 else inter_px / union_px,
        )
        return match, scene_eval, inter_px, union_px

    if jobs > 1 and len(ds.scenes) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(eval_one, ds.scenes))
    else:
        results = [eval_one(s) for s in ds.scenes]

    matches = [r[0] for r in results]
    per_scene = [r[1] for r in results]
    total_inter = sum(r[2] for r in results)
    total_union = sum(r[3] for r in results)
    total_gt = sum(s.n_gt for s in per_scene)

    curve = pr_curve(matches, total_gt)
    matched_ious = [
        rec.iou_at_match for m in matches for rec in m.records if rec.matched
    ]
    tp = len(matched_ious)
    return EvalReport(
        ap50=average_precision(curve),
        union_iou=0.0 if total_union == 0 else total_inter / total_union,
        mean_matched_iou=float(np.mean(matched_ious)) if matched_ious else 0.0,
        tp=tp,
        fp=len(curve) - tp,
        fn=total_gt - tp,
        per_scene=per_scene,
        pr=curve,
    )
