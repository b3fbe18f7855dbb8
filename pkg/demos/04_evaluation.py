"""Score externally produced instance predictions against ground truth:
greedy IoU matching, precision-recall, AP at 50% overlap, and pixel IoU.

Run:  python3 demos/04_evaluation.py
"""
from pathlib import Path

import numpy as np

from slumkit import (
    Detection,
    SynthConfig,
    evaluate,
    gt_masks,
    load_dataset,
    rle_encode,
    write_corpus,
)

out_dir = Path("demo_output/evaluation")
out_dir.mkdir(parents=True, exist_ok=True)

corpus = write_corpus(
    SynthConfig(n_instances=(2, 4)), seed=5, out_dir=out_dir / "corpus", n_scenes=6
)
ds = load_dataset(corpus[0])

# Stand-in for a model: ground truth degraded by erosion-ish pixel noise,
# plus one spurious detection, with plausible confidence scores.
rng = np.random.default_rng(0)
predictions = []
for scene in ds.scenes:
    for mask in gt_masks(ds, scene.id):
        noisy = mask & (rng.random(mask.shape) > 0.12)
        predictions.append(Detection(
            scene_id=scene.id, mask=rle_encode(noisy),
            score=float(rng.uniform(0.6, 0.99)),
        ))
junk = np.zeros((ds.scenes[0].height, ds.scenes[0].width), dtype=bool)
junk[5:25, 5:25] = True
predictions.append(Detection(scene_id=ds.scenes[0].id,
                             mask=rle_encode(junk), score=0.55))

report = evaluate(ds, predictions, threshold=0.5, score_floor=0.5)
print(f"ap50: {report.ap50:.2f}")
print(f"pixel union iou: {report.union_iou:.4f}")
print(f"mean matched-instance iou: {report.mean_matched_iou:.4f}")
print(f"tp {report.tp} / fp {report.fp} / fn {report.fn}")
print("per scene:")
for s in report.per_scene:
    print(f"  {s.scene_id}: gt {s.n_gt}, det {s.n_det}, "
          f"tp {s.tp}, union iou {s.union_iou:.3f}")

report.write_json(out_dir / "report.json")
report.write_csv(out_dir / "report.csv")
report.pr.write_csv(out_dir / "pr_curve.csv")
print(f"wrote report.json / report.csv / pr_curve.csv to {out_dir}/")
