"""The ten gesture glyphs as compositions of analytic primitives.

Each glyph is defined in a unit square [-1, 1]^2 as a union (or
subtraction) of ellipses, rotated rectangles, and annuli, and is
rasterized at arbitrary size and rotation with supersampled edges.
The shapes are stylized hands: a palm blob plus finger bars, a ring
for the ok sign, and a C-frame for the picture gesture.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ..vocabulary import GestureClass

# primitive: (kind, params, subtract)
Primitive = tuple[str, tuple[float, ...], bool]

_PALM = ("ellipse", (0.0, -0.25, 0.52, 0.45, 0.0), False)


def _finger(angle_deg: float, length: float, half_width: float = 0.09, root: float = 0.24) -> Primitive:
    a = math.radians(angle_deg)
    cx = math.cos(a) * (root + length / 2)
    cy = -0.25 + math.sin(a) * (root + length / 2)
    return ("rect", (cx, cy, length / 2 + 0.06, half_width, -a), False)


GLYPH_SHAPES: dict[GestureClass, tuple[Primitive, ...]] = {
    GestureClass.DIGIT_0: (("ellipse", (0.0, -0.12, 0.58, 0.50, 0.25), False),),
    GestureClass.DIGIT_1: (_PALM, _finger(90, 0.62)),
    GestureClass.DIGIT_2: (_PALM, _finger(68, 0.60), _finger(112, 0.60)),
    GestureClass.DIGIT_3: (_PALM, _finger(56, 0.56), _finger(90, 0.64), _finger(124, 0.56)),
    GestureClass.DIGIT_4: (
        _PALM,
        _finger(48, 0.52),
        _finger(76, 0.62),
        _finger(104, 0.62),
        _finger(132, 0.52),
    ),
    GestureClass.DIGIT_5: (
        _PALM,
        _finger(30, 0.44, 0.10),
        _finger(62, 0.58),
        _finger(90, 0.64),
        _finger(118, 0.58),
        _finger(150, 0.44, 0.10),
    ),
    GestureClass.LEFT: (
        ("ellipse", (0.18, -0.22, 0.44, 0.40, 0.0), False),
        ("rect", (-0.42, -0.22, 0.44, 0.12, 0.0), False),
    ),
    GestureClass.RIGHT: (
        ("ellipse", (-0.18, -0.28, 0.42, 0.38, 0.0), False),
        ("rect", (0.38, -0.28, 0.40, 0.19, 0.0), False),
        ("rect", (-0.18, 0.12, 0.13, 0.50, 0.0), False),
    ),
    GestureClass.PIC: (
        ("ring", (0.0, -0.05, 0.72, 0.40), False),
        ("rect", (0.72, -0.05, 0.38, 0.20, 0.0), True),
    ),
    GestureClass.OK: (
        ("ring", (-0.26, -0.42, 0.40, 0.16), False),
        ("ellipse", (-0.02, -0.24, 0.32, 0.24, 0.3), False),  # bridge to the fingers
        _finger(64, 0.52, 0.10, 0.26),
        _finger(90, 0.58, 0.10, 0.26),
        _finger(116, 0.52, 0.10, 0.26),
    ),
}


def _rotate(px: np.ndarray, py: np.ndarray, ang: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = math.cos(ang), math.sin(ang)
    return c * px + s * py, -s * px + c * py


def _primitive_mask(kind: str, params: tuple[float, ...], x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind == "ellipse":
        cx, cy, rx, ry, ang = params
        u, v = _rotate(x - cx, y - cy, ang)
        return (u / rx) ** 2 + (v / ry) ** 2 <= 1.0
    if kind == "rect":
        cx, cy, hw, hh, ang = params
        u, v = _rotate(x - cx, y - cy, ang)
        return (np.abs(u) <= hw) & (np.abs(v) <= hh)
    if kind == "ring":
        cx, cy, outer, inner = params
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return (r2 <= outer * outer) & (r2 >= inner * inner)
    raise ValueError(f"unknown primitive: {kind}")


def mask_from_primitives(
    prims: Iterable[Primitive], x: np.ndarray, y: np.ndarray
) -> np.ndarray:
    mask = np.zeros(x.shape, dtype=bool)
    for kind, params, subtract in prims:
        pm = _primitive_mask(kind, params, x, y)
        mask = mask & ~pm if subtract else mask | pm
    return mask


def raster_glyph(
    gesture: GestureClass, size: int, rotation_deg: float = 0.0, supersample: int = 2
) -> np.ndarray:
    """Boolean glyph mask of shape (size, size); rotation is counterclockwise."""
    n = size * supersample
    coords = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    x, yg = np.meshgrid(coords, coords, indexing="xy")
    y = -yg  # image rows grow downward; glyph space points up
    if rotation_deg:
        x, y = _rotate(x, y, -math.radians(rotation_deg))
    mask = mask_from_primitives(GLYPH_SHAPES[gesture], x, y)
    if supersample > 1:
        mask = (
            mask.reshape(size, supersample, size, supersample).mean(axis=(1, 3)) >= 0.5
        )
    return mask
