"""Synthetic gesture frames with pixel-exact ground truth.

A scene places at most one glyph per image half (plus optional
distractor blobs), renders them in skin tones over a water-like
background, and reports the exact bounding boxes of what it drew.
Rendering is a pure function of (scene, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vocabulary import GestureClass
from .glyphs import mask_from_primitives, raster_glyph
from .raster import FrameRaster

SKIN_RGB = (205.0, 152.0, 112.0)
WATER_TOP = (18.0, 44.0, 84.0)
WATER_BOTTOM = (8.0, 24.0, 48.0)


class InvalidSceneError(ValueError):
    """Scene places glyphs outside the frame or overlapping each other."""


@dataclass(frozen=True)
class HandPlacement:
    gesture: GestureClass
    center: tuple[int, int]  # (x, y) pixels
    scale: int  # glyph half-extent in pixels
    rotation_deg: float = 0.0

    def to_dict(self) -> dict:
        return {
            "gesture": self.gesture.spelling,
            "center": list(self.center),
            "scale": self.scale,
            "rotation_deg": self.rotation_deg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HandPlacement":
        return cls(
            gesture=GestureClass.from_spelling(d["gesture"]),
            center=(int(d["center"][0]), int(d["center"][1])),
            scale=int(d["scale"]),
            rotation_deg=float(d.get("rotation_deg", 0.0)),
        )


@dataclass(frozen=True)
class Distractor:
    """Extra blob: a plain shape or a full glyph, skin-toned or not."""

    kind: str  # "ellipse" | "rect" | "glyph"
    center: tuple[int, int]
    scale: int
    rotation_deg: float = 0.0
    gesture: GestureClass | None = None  # for kind == "glyph"
    skin_colored: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "scale": self.scale,
            "rotation_deg": self.rotation_deg,
            "gesture": self.gesture.spelling if self.gesture else None,
            "skin_colored": self.skin_colored,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Distractor":
        return cls(
            kind=d["kind"],
            center=(int(d["center"][0]), int(d["center"][1])),
            scale=int(d["scale"]),
            rotation_deg=float(d.get("rotation_deg", 0.0)),
            gesture=GestureClass.from_spelling(d["gesture"]) if d.get("gesture") else None,
            skin_colored=bool(d.get("skin_colored", True)),
        )


@dataclass(frozen=True)
class SceneSpec:
    width: int = 320
    height: int = 240
    left: HandPlacement | None = None
    right: HandPlacement | None = None
    distractors: tuple[Distractor, ...] = ()
    noise_sigma: float = 0.0  # additive RGB noise on the [0,1] scale
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "left": self.left.to_dict() if self.left else None,
            "right": self.right.to_dict() if self.right else None,
            "distractors": [d.to_dict() for d in self.distractors],
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        return cls(
            width=int(d.get("width", 320)),
            height=int(d.get("height", 240)),
            left=HandPlacement.from_dict(d["left"]) if d.get("left") else None,
            right=HandPlacement.from_dict(d["right"]) if d.get("right") else None,
            distractors=tuple(Distractor.from_dict(x) for x in d.get("distractors", ())),
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            seed=int(d.get("seed", 0)),
        )


def _glyph_mask_in_frame(
    width: int, height: int, mask: np.ndarray, center: tuple[int, int]
) -> np.ndarray:
    size = mask.shape[0]
    x0 = center[0] - size // 2
    y0 = center[1] - size // 2
    if x0 < 0 or y0 < 0 or x0 + size > width or y0 + size > height:
        raise InvalidSceneError(
            f"glyph of size {size} at {center} does not fit in {width}x{height}"
        )
    frame_mask = np.zeros((height, width), dtype=bool)
    frame_mask[y0 : y0 + size, x0 : x0 + size] = mask
    return frame_mask


def _bbox(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return None
    return (int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def _distractor_mask(d: Distractor, width: int, height: int) -> np.ndarray:
    if d.kind == "glyph":
        if d.gesture is None:
            raise InvalidSceneError("glyph distractor needs a gesture")
        m = raster_glyph(d.gesture, 2 * d.scale, d.rotation_deg)
    elif d.kind in ("ellipse", "rect"):
        n = 2 * d.scale
        coords = (np.arange(n) + 0.5) / n * 2.0 - 1.0
        x, yg = np.meshgrid(coords, coords, indexing="xy")
        prim = (d.kind, (0.0, 0.0, 0.8, 0.55, np.radians(d.rotation_deg)), False)
        m = mask_from_primitives([prim], x, -yg)
    else:
        raise InvalidSceneError(f"unknown distractor kind: {d.kind}")
    return _glyph_mask_in_frame(width, height, m, d.center)


def render_synthetic_frame(
    scene: SceneSpec,
) -> tuple[FrameRaster, dict[str, tuple[int, int, int, int] | None]]:
    """Render a scene; returns the frame and exact per-hand ground-truth boxes."""
    w, h = scene.width, scene.height
    rng = np.random.default_rng(scene.seed)

    # Water background: vertical gradient plus a few dim seeded blobs.
    t = np.linspace(0.0, 1.0, h)[:, None, None]
    top = np.array(WATER_TOP) / 255.0
    bottom = np.array(WATER_BOTTOM) / 255.0
    img = top * (1 - t) + bottom * t
    img = np.broadcast_to(img, (h, w, 3)).copy()
    for _ in range(4):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        r = rng.uniform(8, 24)
        yy, xx = np.mgrid[0:h, 0:w]
        blob = np.exp(-(((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * r * r)))
        img += blob[..., None] * rng.uniform(-0.04, 0.06)

    skin = np.array(SKIN_RGB) / 255.0

    def paint(mask: np.ndarray, skin_colored: bool) -> None:
        shade = 1.0 + 0.06 * rng.standard_normal(mask.shape)
        color = skin if skin_colored else np.array((90.0, 110.0, 90.0)) / 255.0
        img[mask] = np.clip(color[None, :] * shade[mask][:, None], 0.0, 1.0)

    gt: dict[str, tuple[int, int, int, int] | None] = {"left": None, "right": None}
    hand_masks: dict[str, np.ndarray | None] = {"left": None, "right": None}
    for side, placement in (("left", scene.left), ("right", scene.right)):
        if placement is None:
            continue
        glyph = raster_glyph(placement.gesture, 2 * placement.scale, placement.rotation_deg)
        m = _glyph_mask_in_frame(w, h, glyph, placement.center)
        hand_masks[side] = m

    if hand_masks["left"] is not None and hand_masks["right"] is not None:
        if (hand_masks["left"] & hand_masks["right"]).any():
            raise InvalidSceneError("left and right glyphs overlap")

    for d in scene.distractors:
        paint(_distractor_mask(d, w, h), d.skin_colored)
    for side in ("left", "right"):
        mask = hand_masks[side]
        if mask is not None:
            paint(mask, skin_colored=True)
            gt[side] = _bbox(mask)

    if scene.noise_sigma > 0:
        img = img + rng.normal(0.0, scene.noise_sigma, img.shape)

    return FrameRaster.from_float(np.clip(img, 0.0, 1.0)), gt
