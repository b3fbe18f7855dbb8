"""Polygon geometry basics: rasterize outlines into binary masks, encode them
compactly, and combine them with set operations.

Run:  python3 demos/01_polygon_masks.py
"""
from pathlib import Path

import numpy as np

from slumkit import (
    Polygon,
    bounding_box,
    mask_area,
    mask_combine,
    polygon_area,
    rasterize_polygon,
    rle_decode,
    rle_encode,
)
from slumkit.ioutils import save_image

out_dir = Path("demo_output/polygon_masks")
out_dir.mkdir(parents=True, exist_ok=True)

# A settlement outline is just an ordered list of (x, y) pixel vertices.
outline = Polygon(np.array([
    (12.0, 8.0), (52.0, 6.0), (60.0, 30.0), (40.0, 54.0), (14.0, 44.0),
]))
mask = rasterize_polygon(outline, 72, 64)
print(f"rasterized area: {mask_area(mask)} px "
      f"(exact polygon area {polygon_area(outline):.1f} px)")
print(f"bounding box: {bounding_box(mask)}")

# Pixel-center semantics make integer rectangles exact.
rect = Polygon(np.array([(10, 10), (30, 10), (30, 25), (10, 25)]))
print(f"20x15 rectangle rasterizes to {mask_area(rasterize_polygon(rect, 72, 64))} px")

# Run-length encoding is the interchange format for masks in prediction files.
rle = rle_encode(mask)
print(f"rle: {len(rle.runs)} runs for {mask.size} pixels")
assert np.array_equal(rle_decode(rle), mask)

# Boolean combinations underpin both evaluation and change detection.
other = rasterize_polygon(
    Polygon(np.array([(30.0, 20.0), (66.0, 22.0), (58.0, 58.0), (32.0, 50.0)])),
    72, 64,
)
for op in ("union", "intersection", "difference"):
    combined = mask_combine(mask, other, op)
    print(f"{op:<13} area: {mask_area(combined)} px")

save_image(out_dir / "mask_a.png", (mask * np.uint8(255)))
save_image(out_dir / "mask_b.png", (other * np.uint8(255)))
save_image(out_dir / "union.png",
           (mask_combine(mask, other, "union") * np.uint8(255)))
print(f"wrote mask renders to {out_dir}/")
