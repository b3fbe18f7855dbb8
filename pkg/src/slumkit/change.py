"""Mask-subtraction change detection between two capture dates.

Given per-date union masks of the same scene extent, subtraction splits every
pixel into stable / added / removed / background and the area delta becomes a
signed percentage of the earlier date's area. Positive means growth. When the
earlier mask is empty the percentage is undefined, so the result carries a
distinct status instead of a number.

Co-registration is a preprocessing responsibility: the two masks must already
live on the same pixel grid.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .dataset import Detection
from .errors import DimensionMismatch
from .ioutils import sig6, write_json
from .raster import rle_decode

__all__ = [
    "ChangeStatus",
    "ChangeRaster",
    "ChangeResult",
    "scene_union_mask",
    "detect_change",
    "write_change_map_png",
    "BACKGROUND",
    "STABLE",
    "ADDED",
    "REMOVED",
]

# change-raster label values
BACKGROUND, STABLE, ADDED, REMOVED = 0, 1, 2, 3

_MAP_COLORS = {
    BACKGROUND: (0, 0, 0),
    STABLE: (128, 128, 128),
    ADDED: (0, 200, 0),
    REMOVED: (220, 0, 0),
}


class ChangeStatus(str, enum.Enum):
    CHANGED = "changed"
    NO_SLUM_EITHER = "no_slum_either"
    NEW_SETTLEMENT = "new_settlement"


@dataclass
class ChangeRaster:
    """Per-pixel change labels (uint8 array of BACKGROUND/STABLE/ADDED/REMOVED)."""

    labels: np.ndarray

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def count(self, label: int) -> int:
        return int(np.count_nonzero(self.labels == label))


@dataclass
class ChangeResult:
    area_before: int
    area_after: int
    percent_change: Optional[float]  # None unless status is CHANGED
    status: ChangeStatus
    change_map: ChangeRaster

    def to_dict(self) -> dict:
        return {
            "before_px": self.area_before,
            "after_px": self.area_after,
            "percent": None if self.percent_change is None else sig6(self.percent_change),
            "status": self.status.value,
        }

    def write_json(self, path: str | Path) -> None:
        write_json(path, self.to_dict())


def scene_union_mask(
    detections: Sequence[Detection],
    score_floor: float = 0.5,
    shape: Optional[tuple[int, int]] = None,
) -> np.ndarray:
    """Union of all detection masks with score >= score_floor.

    shape is (height, width); when omitted it is inferred from the
    detections, so an empty detection list then has no grid to build on and
    raises DimensionMismatch. Detections disagreeing among themselves or with
    an explicit shape raise DimensionMismatch as well.
    """
    dims = {(d.mask.height, d.mask.width) for d in detections}
    if shape is not None:
        dims.add((int(shape[0]), int(shape[1])))
    if len(dims) > 1:
        raise DimensionMismatch(f"detections disagree on dimensions: {dims}")
    if not dims:
        raise DimensionMismatch("cannot infer mask dimensions from zero detections")
    out = np.zeros(dims.pop(), dtype=bool)
    for det in detections:
        if det.score >= score_floor:
            out |= rle_decode(det.mask)
    return out


def detect_change(mask_before: np.ndarray, mask_after: np.ndarray) -> ChangeResult:
    """Subtract two binary masks and report the signed percentage change.

    percent = 100 * (area_after - area_before) / area_before, relative to the
    earlier date. area_before == 0 cannot anchor a percentage: such pairs get
    status NEW_SETTLEMENT (area appeared) or NO_SLUM_EITHER (both empty) and
    percent None.
    """
    if mask_before.shape != mask_after.shape:
        raise DimensionMismatch(
            f"mask shapes differ: {mask_before.shape} vs {mask_after.shape}"
        )
    before = mask_before.astype(bool)
    after = mask_after.astype(bool)
    area_before = int(np.count_nonzero(before))
    area_after = int(np.count_nonzero(after))

    labels = np.zeros(before.shape, dtype=np.uint8)
    labels[before & after] = STABLE
    labels[after & ~before] = ADDED
    labels[before & ~after] = REMOVED

    if area_before > 0:
        status = ChangeStatus.CHANGED
        percent = 100.0 * (area_after - area_before) / area_before
    elif area_after > 0:
        status = ChangeStatus.NEW_SETTLEMENT
        percent = None
    else:
        status = ChangeStatus.NO_SLUM_EITHER
        percent = None
    return ChangeResult(
        area_before=area_before,
        area_after=area_after,
        percent_change=percent,
        status=status,
        change_map=ChangeRaster(labels=labels),
    )


def write_change_map_png(path: str | Path, change_map: ChangeRaster) -> None:
    """Indexed-color rendering: black background, gray stable, green added,
    red removed."""
    im = Image.fromarray(change_map.labels, mode="P")
    palette = [0] * 768
    for label, (r, g, b) in _MAP_COLORS.items():
        palette[3 * label: 3 * label + 3] = [r, g, b]
    im.putpalette(palette)
    im.save(path, format="PNG")
