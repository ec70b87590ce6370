"""Synthetic labeled patch datasets for training and evaluating the CNN.

Patches come out of the same render-and-crop path the live pipeline
uses: a glyph is placed on a water background with rotation, scale,
offset, brightness, and noise jitter, then the jittered bounding box is
cropped and resized to 32x32.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..vision.glyphs import raster_glyph
from ..vision.raster import bilinear_resize
from ..vision.synthetic import SKIN_RGB, WATER_BOTTOM, WATER_TOP
from ..vocabulary import GestureClass
from . import NUM_CLASSES, PATCH_SIZE

Item = tuple[np.ndarray, int]


@dataclass
class LabeledDataset:
    """Patch/label pairs in disjoint train/validation/test splits."""

    train: list[Item] = field(default_factory=list)
    validation: list[Item] = field(default_factory=list)
    test: list[Item] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {
            "train": len(self.train),
            "validation": len(self.validation),
            "test": len(self.test),
        }

    def validate(self) -> None:
        for split_name in ("train", "validation", "test"):
            for patch, label in getattr(self, split_name):
                if not 0 <= label < NUM_CLASSES:
                    raise ValueError(f"{split_name}: label {label} out of range")
                if patch.shape != (PATCH_SIZE, PATCH_SIZE, 3):
                    raise ValueError(f"{split_name}: bad patch shape {patch.shape}")


def _render_patch(gesture: GestureClass, rng: np.random.Generator) -> np.ndarray:
    # Glyph on a small water canvas, then crop its jittered bbox.
    canvas = 96
    rotation = rng.uniform(-20.0, 20.0)
    scale = rng.uniform(0.8, 1.2)
    size = int(round(36 * scale)) * 2
    mask = raster_glyph(gesture, size, rotation)

    top = np.array(WATER_TOP) / 255.0
    bottom = np.array(WATER_BOTTOM) / 255.0
    t = np.linspace(0.0, 1.0, canvas)[:, None, None]
    img = (top * (1 - t) + bottom * t * rng.uniform(0.7, 1.3)).astype(np.float64)
    img = np.broadcast_to(img, (canvas, canvas, 3)).copy()
    # background clutter: a couple of dim blobs
    yy, xx = np.mgrid[0:canvas, 0:canvas]
    for _ in range(2):
        cx, cy, r = rng.uniform(0, canvas), rng.uniform(0, canvas), rng.uniform(6, 18)
        img += np.exp(-(((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * r * r)))[..., None] * rng.uniform(
            -0.05, 0.08
        )

    off = (canvas - size) // 2
    jx, jy = rng.integers(-4, 5), rng.integers(-4, 5)
    x0, y0 = off + jx, off + jy
    frame_mask = np.zeros((canvas, canvas), dtype=bool)
    frame_mask[y0 : y0 + size, x0 : x0 + size] = mask

    skin = np.array(SKIN_RGB) / 255.0 * rng.uniform(0.92, 1.08)
    shade = 1.0 + 0.05 * rng.standard_normal(frame_mask.sum())
    img[frame_mask] = np.clip(skin[None, :] * shade[:, None], 0.0, 1.0)

    ys, xs = np.nonzero(frame_mask)
    mx0, mx1 = xs.min(), xs.max()
    my0, my1 = ys.min(), ys.max()
    # box jitter imitates imperfect region selection
    mx0 = max(0, mx0 + rng.integers(-2, 3))
    my0 = max(0, my0 + rng.integers(-2, 3))
    mx1 = min(canvas - 1, mx1 + rng.integers(-2, 3))
    my1 = min(canvas - 1, my1 + rng.integers(-2, 3))

    crop = img[my0 : my1 + 1, mx0 : mx1 + 1]
    patch = bilinear_resize(crop, PATCH_SIZE, PATCH_SIZE)
    patch = patch + rng.normal(0.0, 0.02, patch.shape)
    return np.clip(patch, 0.0, 1.0)


def make_glyph_dataset(
    per_class_train: int = 200,
    per_class_val: int = 0,
    per_class_test: int = 40,
    seed: int = 0,
) -> LabeledDataset:
    """Deterministic synthetic dataset; splits are disjoint by construction."""
    rng = np.random.default_rng(seed)
    data = LabeledDataset()
    for gesture in GestureClass:
        for split, count in (
            (data.train, per_class_train),
            (data.validation, per_class_val),
            (data.test, per_class_test),
        ):
            for _ in range(count):
                split.append((_render_patch(gesture, rng), int(gesture)))
    data.validate()
    return data


def save_dataset_dir(data: LabeledDataset, root: str) -> None:
    """One subdirectory per class under each split, patches as PNGs."""
    from PIL import Image

    for split_name in ("train", "validation", "test"):
        for i, (patch, label) in enumerate(getattr(data, split_name)):
            gesture = GestureClass(label)
            d = os.path.join(root, split_name, gesture.spelling)
            os.makedirs(d, exist_ok=True)
            arr = np.clip(np.rint(patch * 255.0), 0, 255).astype(np.uint8)
            Image.fromarray(arr, mode="RGB").save(os.path.join(d, f"{i:05d}.png"))


def load_dataset_dir(root: str) -> LabeledDataset:
    from PIL import Image

    data = LabeledDataset()
    for split_name in ("train", "validation", "test"):
        split_dir = os.path.join(root, split_name)
        if not os.path.isdir(split_dir):
            continue
        split = getattr(data, split_name)
        for class_name in sorted(os.listdir(split_dir)):
            class_dir = os.path.join(split_dir, class_name)
            if not os.path.isdir(class_dir):
                continue
            label = int(GestureClass.from_spelling(class_name))
            for fname in sorted(os.listdir(class_dir)):
                if not fname.endswith(".png"):
                    continue
                img = Image.open(os.path.join(class_dir, fname)).convert("RGB")
                split.append((np.asarray(img, dtype=np.float64) / 255.0, label))
    data.validate()
    return data
