"""Monitor settlement change between two capture dates: union the per-date
predicted masks, subtract them, and report a signed percentage plus a
color-coded change map.

Run:  python3 demos/06_change_monitoring.py
"""
from pathlib import Path

from slumkit import (
    Detection,
    SynthConfig,
    detect_change,
    rasterize_polygon,
    rle_encode,
    scene_union_mask,
    write_change_map_png,
)
from slumkit.synth import generate_pair

out_dir = Path("demo_output/change_monitoring")
out_dir.mkdir(parents=True, exist_ok=True)

# A synthetic location observed twice: the same instances grown by 30%.
cfg = SynthConfig(width=400, height=400, n_instances=(2, 3),
                  instance_radius=(35.0, 55.0), growth_factor=1.30)
(_, scene_b, anns_b), (_, scene_a, anns_a) = generate_pair(cfg, seed=4)
print(f"location {scene_b.id}: {scene_b.capture_year} vs {scene_a.capture_year}")

# Stage 1 normally runs an external model per date; here the ground truth
# stands in for its predictions.
def as_detections(scene, annotations):
    return [
        Detection(
            scene_id=scene.id,
            mask=rle_encode(rasterize_polygon(a.polygon, scene.width, scene.height)),
            score=0.95,
        )
        for a in annotations
    ]

mask_before = scene_union_mask(as_detections(scene_b, anns_b), score_floor=0.5)
mask_after = scene_union_mask(as_detections(scene_a, anns_a), score_floor=0.5)

# Stage 2 is pure mask arithmetic.
result = detect_change(mask_before, mask_after)
print(f"area before: {result.area_before} px")
print(f"area after:  {result.area_after} px")
print(f"change:      {result.percent_change:+.2f}% ({result.status.value})")
print(f"added {result.change_map.count(2)} px, "
      f"removed {result.change_map.count(3)} px, "
      f"stable {result.change_map.count(1)} px")

write_change_map_png(out_dir / "change_map.png", result.change_map)
result.write_json(out_dir / "change.json")
print(f"wrote change_map.png and change.json to {out_dir}/")
