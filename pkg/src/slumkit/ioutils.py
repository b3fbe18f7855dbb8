"""Small I/O helpers: JSON with stable float formatting, PNG images."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from .errors import ImageLoadError, ParseError


def sig6(x: float) -> float:
    """Round to 6 significant digits so serialized reports are stable."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    return float(f"{x:.6g}")


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_json(path: str | Path, obj: Any) -> None:
    """Write JSON with fixed key order (insertion order) and a trailing newline."""
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8"
    )


def load_image(path: str | Path) -> np.ndarray:
    """Load an image file as an 8-bit RGB array of shape (H, W, 3)."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise ImageLoadError(f"cannot read image {path}: {exc}") from exc


def save_image(path: str | Path, image: np.ndarray) -> None:
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {arr.dtype}")
    if arr.ndim == 2:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    elif arr.ndim == 3 and arr.shape[2] == 3:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported image shape {arr.shape}")
