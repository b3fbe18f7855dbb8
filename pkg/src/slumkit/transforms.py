"""Preprocessing (aspect-preserving resize + pad) and augmentations, applied
consistently to an image and its polygon annotations.

Polygons are always transformed analytically by the exact affine map; images
are resampled by inverse-mapping each output pixel center with bilinear
interpolation and black fill outside the source. Ground-truth masks should be
re-rasterized from the transformed polygons, never warped as rasters: vertex
arithmetic is exact while mask resampling is not.

Coordinates use the raster module's convention: pixel (i, j) has its center
at (i + 0.5, j + 0.5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidConfig
from .raster import Polygon

__all__ = [
    "GeomTransform",
    "ColorJitter",
    "ResizePadResult",
    "AugmentConfig",
    "resize_pad",
    "apply_geometric",
    "apply_color",
    "augment",
    "warp_affine",
]


@dataclass
class GeomTransform:
    """Flip / rotate / translate, composed in exactly that order.

    Flips mirror across the image midlines (x -> W-x, y -> H-y), rotation is
    about the image center (W/2, H/2), translation is in pixels.
    """

    flip_h: bool = False
    flip_v: bool = False
    angle_deg: float = 0.0
    dx: float = 0.0
    dy: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.angle_deg)
                and math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise InvalidConfig("transform parameters must be finite")


@dataclass
class ColorJitter:
    """Hue rotation (degrees) and saturation scaling in HSV space."""

    hue_delta: float = 0.0
    sat_factor: float = 1.0

    def __post_init__(self) -> None:
        if not -180.0 <= self.hue_delta <= 180.0:
            raise InvalidConfig(f"hue_delta {self.hue_delta} outside [-180, 180]")
        if not self.sat_factor > 0.0:
            raise InvalidConfig(f"sat_factor must be > 0, got {self.sat_factor}")


@dataclass
class ResizePadResult:
    image: np.ndarray
    scale_factor: float
    pad_left: int
    pad_top: int
    annotations: list[Polygon]


def _transform_vertices_geometric(
    vertices: np.ndarray, t: GeomTransform, width: int, height: int
) -> np.ndarray:
    v = vertices.copy()
    if t.flip_h:
        v[:, 0] = width - v[:, 0]
    if t.flip_v:
        v[:, 1] = height - v[:, 1]
    if t.angle_deg != 0.0:
        theta = math.radians(t.angle_deg)
        c, s = math.cos(theta), math.sin(theta)
        cx, cy = width / 2.0, height / 2.0
        x = v[:, 0] - cx
        y = v[:, 1] - cy
        v = np.column_stack([cx + c * x - s * y, cy + s * x + c * y])
    v[:, 0] += t.dx
    v[:, 1] += t.dy
    return v


def _geom_matrix(t: GeomTransform, width: int, height: int) -> np.ndarray:
    """3x3 forward matrix equal to the flip -> rotate -> translate chain."""
    flip = np.eye(3)
    if t.flip_h:
        flip = np.array([[-1, 0, width], [0, 1, 0], [0, 0, 1]], dtype=float) @ flip
    if t.flip_v:
        flip = np.array([[1, 0, 0], [0, -1, height], [0, 0, 1]], dtype=float) @ flip
    theta = math.radians(t.angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = width / 2.0, height / 2.0
    rot = np.array(
        [[c, -s, cx - c * cx + s * cy],
         [s, c, cy - s * cx - c * cy],
         [0, 0, 1]]
    )
    trans = np.array([[1, 0, t.dx], [0, 1, t.dy], [0, 0, 1]], dtype=float)
    return trans @ rot @ flip


def warp_affine(
    image: np.ndarray, matrix: np.ndarray, out_shape: tuple[int, int]
) -> np.ndarray:
    """Resample with the inverse of a forward 3x3 affine matrix.

    Output pixel centers are mapped back into the source, sampled bilinearly
    among the four surrounding centers, with black outside the source grid.
    """
    height, width = out_shape
    inv = np.linalg.inv(matrix)
    xs, ys = np.meshgrid(
        np.arange(width) + 0.5, np.arange(height) + 0.5
    )
    src_x = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]
    src_y = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]

    # continuous pixel-index space (center of pixel u is at u)
    fx = src_x - 0.5
    fy = src_y - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    wx = fx - x0
    wy = fy - y0

    src = np.atleast_3d(image).astype(np.float64)
    in_h, in_w = src.shape[:2]
    out = np.zeros((height, width, src.shape[2]), dtype=np.float64)
    for dy_n, dx_n, weight in (
        (0, 0, (1 - wy) * (1 - wx)),
        (0, 1, (1 - wy) * wx),
        (1, 0, wy * (1 - wx)),
        (1, 1, wy * wx),
    ):
        yy = y0 + dy_n
        xx = x0 + dx_n
        valid = (yy >= 0) & (yy < in_h) & (xx >= 0) & (xx < in_w)
        vals = np.zeros_like(out)
        vals[valid] = src[yy[valid], xx[valid]]
        out += weight[..., None] * vals
    result = np.rint(out).clip(0, 255).astype(np.uint8)
    if image.ndim == 2:
        return result[..., 0]
    return result


def resize_pad(
    image: np.ndarray,
    annotations: Sequence[Polygon] = (),
    out_size: int = 1024,
) -> ResizePadResult:
    """Scale the longer side to out_size, keep the aspect ratio, and center
    with zero padding (odd leftover goes to the bottom/right).

    Vertices map as v' = v * scale + (pad_left, pad_top); ties in the content
    rounding go up.
    """
    height, width = image.shape[:2]
    scale = out_size / max(width, height)
    content_w = int(math.floor(width * scale + 0.5))
    content_h = int(math.floor(height * scale + 0.5))
    pad_left = (out_size - content_w) // 2
    pad_top = (out_size - content_h) // 2
    matrix = np.array(
        [[scale, 0, pad_left], [0, scale, pad_top], [0, 0, 1]], dtype=float
    )
    out = warp_affine(image, matrix, (out_size, out_size))
    moved = [
        Polygon(p.vertices * scale + np.array([pad_left, pad_top], dtype=float))
        for p in annotations
    ]
    return ResizePadResult(
        image=out,
        scale_factor=scale,
        pad_left=pad_left,
        pad_top=pad_top,
        annotations=moved,
    )


def apply_geometric(
    image: np.ndarray,
    annotations: Sequence[Polygon],
    t: GeomTransform,
) -> tuple[np.ndarray, list[Polygon]]:
    """Apply flip -> rotate -> translate to image and polygons together."""
    height, width = image.shape[:2]
    moved = [
        Polygon(_transform_vertices_geometric(p.vertices, t, width, height))
        for p in annotations
    ]
    out = warp_affine(image, _geom_matrix(t, width, height), (height, width))
    return out, moved


def _rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB [0,1] -> (hue degrees [0,360), sat [0,1], value [0,1])."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.max(rgb, axis=-1)
    minc = np.min(rgb, axis=-1)
    delta = maxc - minc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    hue = np.zeros_like(maxc)
    nz = delta > 0
    d = np.where(nz, delta, 1.0)
    r_max = nz & (maxc == r)
    g_max = nz & ~r_max & (maxc == g)
    b_max = nz & ~r_max & ~g_max
    hue = np.where(r_max, ((g - b) / d) % 6.0, hue)
    hue = np.where(g_max, (b - r) / d + 2.0, hue)
    hue = np.where(b_max, (r - g) / d + 4.0, hue)
    return hue * 60.0, sat, maxc


def _hsv_to_rgb(hue: np.ndarray, sat: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Inverse of _rgb_to_hsv, hue in degrees."""
    h = (hue % 360.0) / 60.0
    sector = np.floor(h).astype(np.int64) % 6
    f = h - np.floor(h)
    p = value * (1.0 - sat)
    q = value * (1.0 - sat * f)
    t = value * (1.0 - sat * (1.0 - f))
    choices = [
        (value, t, p),
        (q, value, p),
        (p, value, t),
        (p, q, value),
        (t, p, value),
        (value, p, q),
    ]
    r = np.choose(sector, [c[0] for c in choices])
    g = np.choose(sector, [c[1] for c in choices])
    b = np.choose(sector, [c[2] for c in choices])
    return np.stack([r, g, b], axis=-1)


def apply_color(image: np.ndarray, jitter: ColorJitter) -> np.ndarray:
    """Rotate hue and scale saturation in HSV; value is untouched.

    Gray pixels (zero saturation) are fixed points: hue rotation has nothing
    to rotate and saturation scaling keeps zero at zero. Output is rounded
    back to uint8.
    """
    if jitter.hue_delta == 0.0 and jitter.sat_factor == 1.0:
        return image.copy()
    rgb = image.astype(np.float64) / 255.0
    hue, sat, value = _rgb_to_hsv(rgb)
    hue = (hue + jitter.hue_delta) % 360.0
    sat = np.clip(sat * jitter.sat_factor, 0.0, 1.0)
    out = _hsv_to_rgb(hue, sat, value)
    return np.rint(out * 255.0).clip(0, 255).astype(np.uint8)


_RANGE_KEYS = ("rot_deg", "trans_px", "hue_deg", "sat")


@dataclass
class AugmentConfig:
    """Sampling ranges for augment(); flips sample a fair coin when enabled.

    JSON form: {"flip_h": bool, "flip_v": bool, "rot_deg": [lo, hi],
    "trans_px": [lo, hi], "hue_deg": [lo, hi], "sat": [lo, hi]}.
    """

    flip_h: bool = True
    flip_v: bool = True
    rot_deg: tuple[float, float] = (-15.0, 15.0)
    trans_px: tuple[float, float] = (-64.0, 64.0)
    hue_deg: tuple[float, float] = (-18.0, 18.0)
    sat: tuple[float, float] = (0.8, 1.25)

    def __post_init__(self) -> None:
        for key in _RANGE_KEYS:
            rng = getattr(self, key)
            if len(rng) != 2 or not all(math.isfinite(v) for v in rng):
                raise InvalidConfig(f"{key} must be a finite [lo, hi] pair")
            lo, hi = float(rng[0]), float(rng[1])
            if lo > hi:
                raise InvalidConfig(f"{key} range is inverted: [{lo}, {hi}]")
            setattr(self, key, (lo, hi))
        if not (-180.0 <= self.hue_deg[0] and self.hue_deg[1] <= 180.0):
            raise InvalidConfig("hue_deg range must lie within [-180, 180]")
        if self.sat[0] <= 0.0:
            raise InvalidConfig("sat range must be strictly positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "AugmentConfig":
        kwargs = {}
        for key in ("flip_h", "flip_v"):
            if key in doc:
                kwargs[key] = bool(doc[key])
        for key in _RANGE_KEYS:
            if key in doc:
                kwargs[key] = tuple(doc[key])
        return cls(**kwargs)


def augment(
    image: np.ndarray,
    annotations: Sequence[Polygon],
    config: AugmentConfig,
    seed: int,
) -> tuple[np.ndarray, list[Polygon]]:
    """Sample one transform from the config ranges and apply it.

    Deterministic: the same (inputs, config, seed) always produce the same
    output. Geometric transform first, then color jitter.
    """
    rng = np.random.default_rng(seed)
    flip_draws = rng.random(2)  # drawn unconditionally so the stream layout is fixed
    t = GeomTransform(
        flip_h=bool(config.flip_h and flip_draws[0] < 0.5),
        flip_v=bool(config.flip_v and flip_draws[1] < 0.5),
        angle_deg=float(rng.uniform(*config.rot_deg)),
        dx=float(rng.uniform(*config.trans_px)),
        dy=float(rng.uniform(*config.trans_px)),
    )
    jitter = ColorJitter(
        hue_delta=float(rng.uniform(*config.hue_deg)),
        sat_factor=float(rng.uniform(*config.sat)),
    )
    out, moved = apply_geometric(image, annotations, t)
    return apply_color(out, jitter), moved
