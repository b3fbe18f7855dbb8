"""Dataset and prediction interchange: scenes, polygon ground truth, and
externally produced mask detections.

File formats (JSON):

dataset::

    {"scenes": [{"id", "image_path", "width", "height",
                 "scale": "100m"|"1000m", "capture_year"}],
     "annotations": [{"scene_id", "category", "polygon": [[x, y], ...]}],
     "split": "train"|"test"}

predictions::

    [{"scene_id", "category", "score",
      "mask": {"width", "height", "runs": [...]}}]

Datasets are immutable after load and safe to share across threads.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedRle, UnknownScene, ValidationError
from .ioutils import read_json, write_json
from .raster import Polygon, RleMask, rasterize_polygon


class Scale(str, enum.Enum):
    """Viewing scale of a capture; the two supported ground footprints."""

    M100 = "100m"
    M1000 = "1000m"


@dataclass
class Scene:
    """One satellite capture: image reference plus metadata."""

    id: str
    image_path: str
    width: int
    height: int
    scale: Scale
    capture_year: int


@dataclass
class InstanceAnnotation:
    """Ground-truth instance: one polygon outline on one scene."""

    scene_id: str
    polygon: Polygon
    category: str = "slum"


@dataclass
class Detection:
    """Predicted instance: RLE mask plus confidence, from an external model."""

    scene_id: str
    mask: RleMask
    score: float
    category: str = "slum"


@dataclass
class Dataset:
    scenes: list[Scene]
    annotations: list[InstanceAnnotation]
    split: str = "test"
    _by_id: dict[str, Scene] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Scene] = {}
        for i, scene in enumerate(self.scenes):
            if scene.id in by_id:
                raise ValidationError(f"scenes[{i}]: duplicate scene id {scene.id!r}")
            if scene.width <= 0 or scene.height <= 0:
                raise ValidationError(
                    f"scenes[{i}]: bad dimensions {scene.width}x{scene.height}"
                )
            by_id[scene.id] = scene
        for i, ann in enumerate(self.annotations):
            if ann.scene_id not in by_id:
                raise ValidationError(
                    f"annotations[{i}]: unknown scene_id {ann.scene_id!r}"
                )
        if self.split not in ("train", "test"):
            raise ValidationError(f"split must be 'train' or 'test', got {self.split!r}")
        self._by_id = by_id

    def scene(self, scene_id: str) -> Scene:
        try:
            return self._by_id[scene_id]
        except KeyError:
            raise UnknownScene(f"no scene with id {scene_id!r}") from None

    def annotations_for(self, scene_id: str) -> list[InstanceAnnotation]:
        self.scene(scene_id)
        return [a for a in self.annotations if a.scene_id == scene_id]


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing key {key!r}")
    return obj[key]


def load_dataset(path: str | Path) -> Dataset:
    """Load and fully validate a dataset file.

    Deterministic and order-preserving: identical bytes give an identical
    Dataset. Raises ParseError for malformed JSON, ValidationError (naming
    the offending item index) for invariant violations.
    """
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    scenes = []
    for i, raw in enumerate(_require(doc, "scenes", str(path))):
        where = f"scenes[{i}]"
        scale_tag = _require(raw, "scale", where)
        try:
            scale = Scale(scale_tag)
        except ValueError:
            raise ValidationError(f"{where}: bad scale tag {scale_tag!r}") from None
        scenes.append(
            Scene(
                id=str(_require(raw, "id", where)),
                image_path=str(_require(raw, "image_path", where)),
                width=int(_require(raw, "width", where)),
                height=int(_require(raw, "height", where)),
                scale=scale,
                capture_year=int(_require(raw, "capture_year", where)),
            )
        )
    annotations = []
    for i, raw in enumerate(_require(doc, "annotations", str(path))):
        where = f"annotations[{i}]"
        pts = np.asarray(_require(raw, "polygon", where), dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValidationError(f"{where}: degenerate polygon")
        try:
            polygon = Polygon(pts)
        except Exception as exc:
            raise ValidationError(f"{where}: degenerate polygon ({exc})") from exc
        annotations.append(
            InstanceAnnotation(
                scene_id=str(_require(raw, "scene_id", where)),
                polygon=polygon,
                category=str(raw.get("category", "slum")),
            )
        )
    return Dataset(
        scenes=scenes,
        annotations=annotations,
        split=str(doc.get("split", "test")),
    )


def save_dataset(path: str | Path, ds: Dataset) -> None:
    """Serialize a Dataset; load_dataset(save_dataset(ds)) == ds."""
    doc = {
        "scenes": [
            {
                "id": s.id,
                "image_path": s.image_path,
                "width": s.width,
                "height": s.height,
                "scale": s.scale.value,
                "capture_year": s.capture_year,
            }
            for s in ds.scenes
        ],
        "annotations": [
            {
                "scene_id": a.scene_id,
                "category": a.category,
                "polygon": [[float(x), float(y)] for x, y in a.polygon.vertices],
            }
            for a in ds.annotations
        ],
        "split": ds.split,
    }
    write_json(path, doc)


def load_predictions(path: str | Path, ds: Dataset) -> list[Detection]:
    """Load a prediction file and validate every detection against ds."""
    doc = read_json(path)
    if not isinstance(doc, list):
        raise ValidationError(f"{path}: top level must be a list")
    detections = []
    for i, raw in enumerate(doc):
        where = f"predictions[{i}]"
        scene_id = str(_require(raw, "scene_id", where))
        try:
            scene = ds.scene(scene_id)
        except UnknownScene:
            raise ValidationError(f"{where}: unknown scene_id {scene_id!r}") from None
        score = float(_require(raw, "score", where))
        if not 0.0 <= score <= 1.0:
            raise ValidationError(f"{where}: score {score} outside [0, 1]")
        m = _require(raw, "mask", where)
        try:
            rle = RleMask(
                width=int(_require(m, "width", where)),
                height=int(_require(m, "height", where)),
                runs=list(_require(m, "runs", where)),
            )
        except MalformedRle as exc:
            raise MalformedRle(f"scene {scene_id!r}: {exc}") from exc
        if rle.width != scene.width or rle.height != scene.height:
            raise ValidationError(
                f"{where}: mask is {rle.width}x{rle.height} but scene "
                f"{scene_id!r} is {scene.width}x{scene.height}"
            )
        detections.append(
            Detection(
                scene_id=scene_id,
                mask=rle,
                score=score,
                category=str(raw.get("category", "slum")),
            )
        )
    return detections


def save_predictions(path: str | Path, detections: list[Detection]) -> None:
    doc = [
        {
            "scene_id": d.scene_id,
            "category": d.category,
            "score": d.score,
            "mask": {"width": d.mask.width, "height": d.mask.height, "runs": d.mask.runs},
        }
        for d in detections
    ]
    write_json(path, doc)


def gt_masks(ds: Dataset, scene_id: str) -> list[np.ndarray]:
    """Rasterize the scene's annotations, one mask per annotation, in
    annotation order."""
    scene = ds.scene(scene_id)
    return [
        rasterize_polygon(a.polygon, scene.width, scene.height)
        for a in ds.annotations
        if a.scene_id == scene_id
    ]


def resolve_image_path(dataset_path: str | Path, scene: Scene) -> Path:
    """Scene image paths are stored relative to the dataset file."""
    p = Path(scene.image_path)
    return p if p.is_absolute() else Path(dataset_path).parent / p
