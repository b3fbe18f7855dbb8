"""Seeded procedural generator of labeled scenes and temporal pairs.

Scenes carry star-convex polygon instances (random radii around a center at
strictly increasing angles, hence always simple) over a smooth low-frequency
background; pixels inside instances get high-frequency speckle so that the
labels correspond to an actual texture difference. Temporal pairs reuse the
same instances with every polygon rescaled about its vertex centroid by
sqrt(growth_factor), which multiplies its exact polygon area by the factor.

Instance centers sit on distinct cells of a coarse grid with a margin large
enough that instances stay disjoint and in-bounds before AND after growth, so
a pair's total mask area ratio tracks growth_factor up to rasterization
boundary error.

Everything is a pure function of (config, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, InstanceAnnotation, Scale, Scene, save_dataset
from .errors import InvalidConfig
from .ioutils import save_image
from .raster import Polygon, rasterize_polygon

__all__ = ["SynthConfig", "generate_scene", "generate_pair", "write_corpus"]

# free space required around an instance, as a multiple of its max radius
_MARGIN = 1.15


@dataclass
class SynthConfig:
    width: int = 320
    height: int = 240
    n_instances: tuple[int, int] = (2, 4)
    vertices_per_instance: tuple[int, int] = (8, 14)
    instance_radius: tuple[float, float] = (18.0, 32.0)
    texture_contrast: float = 0.6
    growth_factor: float = 1.0
    scale: Scale = Scale.M100
    capture_year: int = 2018

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InvalidConfig("width and height must be positive")
        for name in ("n_instances", "vertices_per_instance", "instance_radius"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidConfig(f"{name} range is inverted: [{lo}, {hi}]")
        if self.n_instances[0] < 0:
            raise InvalidConfig("n_instances must be non-negative")
        if self.vertices_per_instance[0] < 3:
            raise InvalidConfig("instances need at least 3 vertices")
        if self.instance_radius[0] <= 0:
            raise InvalidConfig("instance radius must be positive")
        if self.instance_radius[1] >= min(self.width, self.height) / 2:
            raise InvalidConfig("instance radius too large for the image")
        if not 0.0 <= self.texture_contrast <= 1.0:
            raise InvalidConfig("texture_contrast must be in [0, 1]")
        if self.growth_factor <= 0.0:
            raise InvalidConfig("growth_factor must be positive")

    def _check_placement_feasible(self, reach: float) -> int:
        """Cells-per-side of the placement grid; reach is the worst-case
        instance halo radius in pixels."""
        n_max = self.n_instances[1]
        per_side = max(1, math.isqrt(max(n_max - 1, 0)) + 1)
        cell_w = self.width / per_side
        cell_h = self.height / per_side
        if min(cell_w, cell_h) < 2.0 * reach:
            raise InvalidConfig(
                f"cannot place {n_max} instances of reach {reach:.1f}px "
                f"disjointly on a {self.width}x{self.height} image"
            )
        return per_side


def _star_polygon(rng: np.random.Generator, center, n_vertices, r_lo, r_hi) -> Polygon:
    # evenly spaced angles with bounded jitter keep the order strict, so the
    # ring is star-shaped around the center and therefore simple
    base = np.linspace(0.0, 2.0 * math.pi, n_vertices, endpoint=False)
    jitter = rng.uniform(-0.4, 0.4, size=n_vertices) * (2.0 * math.pi / n_vertices)
    angles = base + jitter
    radii = rng.uniform(r_lo, r_hi, size=n_vertices)
    xs = center[0] + radii * np.cos(angles)
    ys = center[1] + radii * np.sin(angles)
    return Polygon(np.column_stack([xs, ys]))


def _place_instances(cfg: SynthConfig, rng: np.random.Generator, reach: float):
    """Pick instance centers on distinct grid cells with jitter that keeps a
    +-reach halo inside the cell."""
    per_side = cfg._check_placement_feasible(reach)
    n = int(rng.integers(cfg.n_instances[0], cfg.n_instances[1] + 1))
    cells = rng.permutation(per_side * per_side)[:n]
    cell_w = cfg.width / per_side
    cell_h = cfg.height / per_side
    centers = []
    for cell in cells:
        cx = (cell % per_side + 0.5) * cell_w
        cy = (cell // per_side + 0.5) * cell_h
        slack_x = cell_w / 2.0 - reach
        slack_y = cell_h / 2.0 - reach
        centers.append(
            (
                cx + rng.uniform(-slack_x, slack_x),
                cy + rng.uniform(-slack_y, slack_y),
            )
        )
    return centers


def _render_image(
    cfg: SynthConfig, rng: np.random.Generator, polygons: list[Polygon]
) -> np.ndarray:
    """Low-frequency background; speckle with variance ~ texture_contrast
    inside the instance union."""
    h, w = cfg.height, cfg.width
    coarse = rng.uniform(0.35, 0.65, size=(h // 16 + 2, w // 16 + 2))
    yy = np.linspace(0, coarse.shape[0] - 1.001, h)
    xx = np.linspace(0, coarse.shape[1] - 1.001, w)
    y0 = np.floor(yy).astype(int)
    x0 = np.floor(xx).astype(int)
    fy = (yy - y0)[:, None]
    fx = (xx - x0)[None, :]
    background = (
        coarse[np.ix_(y0, x0)] * (1 - fy) * (1 - fx)
        + coarse[np.ix_(y0, x0 + 1)] * (1 - fy) * fx
        + coarse[np.ix_(y0 + 1, x0)] * fy * (1 - fx)
        + coarse[np.ix_(y0 + 1, x0 + 1)] * fy * fx
    )

    union = np.zeros((h, w), dtype=bool)
    for poly in polygons:
        union |= rasterize_polygon(poly, w, h)

    speckle_amp = 0.5 * math.sqrt(cfg.texture_contrast)
    speckle = rng.uniform(-speckle_amp, speckle_amp, size=(h, w))
    gray = np.clip(background + np.where(union, speckle, 0.0), 0.0, 1.0)

    # mild fixed tint so scenes are actual RGB, not replicated grayscale
    image = np.stack([gray * 0.95, gray, gray * 0.85], axis=-1)
    return np.rint(image * 255.0).clip(0, 255).astype(np.uint8)


def generate_scene(
    cfg: SynthConfig, seed: int, scene_id: str = "scene"
) -> tuple[np.ndarray, Scene, list[InstanceAnnotation]]:
    """Generate one labeled scene; deterministic per (cfg, seed)."""
    rng = np.random.default_rng(seed)
    reach = _MARGIN * cfg.instance_radius[1]
    centers = _place_instances(cfg, rng, reach)
    polygons = [
        _star_polygon(
            rng,
            center,
            int(rng.integers(cfg.vertices_per_instance[0],
                             cfg.vertices_per_instance[1] + 1)),
            cfg.instance_radius[0],
            cfg.instance_radius[1],
        )
        for center in centers
    ]
    image = _render_image(cfg, rng, polygons)
    scene = Scene(
        id=scene_id,
        image_path=f"images/{scene_id}.png",
        width=cfg.width,
        height=cfg.height,
        scale=cfg.scale,
        capture_year=cfg.capture_year,
    )
    annotations = [
        InstanceAnnotation(scene_id=scene_id, polygon=p) for p in polygons
    ]
    return image, scene, annotations


def _scale_about_centroid(poly: Polygon, factor: float) -> Polygon:
    centroid = poly.vertices.mean(axis=0)
    return Polygon(centroid + (poly.vertices - centroid) * factor)


def generate_pair(
    cfg: SynthConfig,
    seed: int,
    scene_id: str = "scene",
    year_before: int = 2005,
    year_after: int = 2018,
):
    """Generate a before/after pair of the same location.

    The after scene reuses the before instances with each polygon scaled by
    sqrt(growth_factor) about its centroid, so each exact polygon area (and,
    for disjoint in-bounds instances, the total mask area) grows by
    growth_factor up to rasterization boundary error.

    Returns ((image, scene, annotations) for before, same for after).
    """
    rng = np.random.default_rng(seed)
    linear = math.sqrt(cfg.growth_factor)
    reach = _MARGIN * cfg.instance_radius[1] * max(1.0, linear)
    centers = _place_instances(cfg, rng, reach)
    before_polys = [
        _star_polygon(
            rng,
            center,
            int(rng.integers(cfg.vertices_per_instance[0],
                             cfg.vertices_per_instance[1] + 1)),
            cfg.instance_radius[0],
            cfg.instance_radius[1],
        )
        for center in centers
    ]
    after_polys = [_scale_about_centroid(p, linear) for p in before_polys]

    image_before = _render_image(cfg, rng, before_polys)
    image_after = _render_image(cfg, rng, after_polys)

    def pack(year, image, polys):
        scene = Scene(
            id=scene_id,
            image_path=f"images/{scene_id}.png",
            width=cfg.width,
            height=cfg.height,
            scale=cfg.scale,
            capture_year=year,
        )
        anns = [InstanceAnnotation(scene_id=scene_id, polygon=p) for p in polys]
        return image, scene, anns

    return (
        pack(year_before, image_before, before_polys),
        pack(year_after, image_after, after_polys),
    )


def write_corpus(cfg: SynthConfig, seed: int, out_dir: str | Path, n_scenes: int = 1):
    """Emit a synthetic corpus in the standard dataset layout.

    Single mode (growth_factor == 1): out_dir/dataset.json + images/.
    Pair mode (growth_factor != 1): out_dir/{before,after}/dataset.json with
    the same scene ids on both sides, earlier/later capture years, and the
    after instances grown by growth_factor.
    """
    out = Path(out_dir)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n_scenes)]
    if cfg.growth_factor == 1.0:
        (out / "images").mkdir(parents=True, exist_ok=True)
        scenes, annotations = [], []
        for i, child_seed in enumerate(seeds):
            image, scene, anns = generate_scene(cfg, child_seed, scene_id=f"s{i:03d}")
            save_image(out / scene.image_path, image)
            scenes.append(scene)
            annotations.extend(anns)
        save_dataset(out / "dataset.json", Dataset(scenes=scenes, annotations=annotations))
        return [out / "dataset.json"]

    paths = []
    for epoch in ("before", "after"):
        (out / epoch / "images").mkdir(parents=True, exist_ok=True)
    halves = {"before": ([], []), "after": ([], [])}
    for i, child_seed in enumerate(seeds):
        pair = generate_pair(cfg, child_seed, scene_id=f"s{i:03d}")
        for epoch, (image, scene, anns) in zip(("before", "after"), pair):
            save_image(out / epoch / scene.image_path, image)
            halves[epoch][0].append(scene)
            halves[epoch][1].extend(anns)
    for epoch in ("before", "after"):
        scenes, annotations = halves[epoch]
        path = out / epoch / "dataset.json"
        save_dataset(path, Dataset(scenes=scenes, annotations=annotations))
        paths.append(path)
    return paths
