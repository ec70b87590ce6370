"""Hand-region selection: segment, feature-extract, cache-filter, bank-match."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ..vocabulary import GestureClass
from .contours import ContourFeatures, extract_contour_features
from .raster import FrameRaster, bilinear_resize
from .segmentation import DEFAULT_SKIN_BAND, HsvThreshold, segment_skin


class InvalidRegionError(ValueError):
    """Crop box degenerate or outside the frame."""


@dataclass(frozen=True)
class RegionBox:
    """Axis-aligned region; score is the bank-match distance (lower is better)."""

    x: int
    y: int
    w: int
    h: int
    score: float = 0.0

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def area(self) -> int:
        return self.w * self.h

    def intersects(self, other: "RegionBox") -> bool:
        return not (
            self.x + self.w <= other.x
            or other.x + other.w <= self.x
            or self.y + self.h <= other.y
            or other.y + other.h <= self.y
        )

    def iou(self, other: "RegionBox") -> float:
        ix = max(0, min(self.x + self.w, other.x + other.w) - max(self.x, other.x))
        iy = max(0, min(self.y + self.h, other.y + other.h) - max(self.y, other.y))
        inter = ix * iy
        union = self.area() + other.area() - inter
        return inter / union if union > 0 else 0.0

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h, "score": self.score}


@dataclass(frozen=True)
class CacheEntry:
    box: RegionBox
    frame: int  # cache clock value when this entry was stored


@dataclass(frozen=True)
class RegionCache:
    """Previous-frame hand locations used to reject outlier candidates."""

    left: CacheEntry | None = None
    right: CacheEntry | None = None
    clock: int = 0
    max_age: int = 10
    max_drift: float = 96.0
    max_scale_ratio: float = 1.7

    def valid_entries(self) -> list[CacheEntry]:
        out = []
        for entry in (self.left, self.right):
            if entry is not None and self.clock - entry.frame <= self.max_age:
                out.append(entry)
        return out


@dataclass(frozen=True)
class VisionParams:
    """Tunables for the selector; defaults match the synthetic skin tones."""

    band: HsvThreshold = DEFAULT_SKIN_BAND
    blur_radius: int = 2
    min_area_frac: float = 0.005  # of frame area; rejects speckle
    max_match_distance: float = 9.0  # bank distance beyond which a blob is not a hand


DEFAULT_VISION_PARAMS = VisionParams()

_BANK_GLYPH_SCALE = 44  # half-extent in px of the reference renders


def contour_bank(scale: int = _BANK_GLYPH_SCALE) -> list[tuple[GestureClass, ContourFeatures]]:
    """Reference contour features, one per gesture class.

    Each reference glyph is rendered on the synthetic background and run
    through the same blur-and-segment path as live frames, so the bank
    reflects hands as the selector actually sees them (blur erosion
    included), not idealized masks.
    """
    return _contour_bank_cached(scale)


@lru_cache(maxsize=4)
def _contour_bank_cached(scale: int) -> list[tuple[GestureClass, ContourFeatures]]:
    from .synthetic import HandPlacement, SceneSpec, render_synthetic_frame

    side = max(4 * scale, 64)
    bank = []
    params = DEFAULT_VISION_PARAMS
    for gesture in GestureClass:
        scene = SceneSpec(
            width=side,
            height=side,
            left=HandPlacement(gesture, (side // 2, side // 2), scale, 0.0),
            seed=0,
        )
        frame, _ = render_synthetic_frame(scene)
        mask = segment_skin(frame, params.band, params.blur_radius)
        feats = extract_contour_features(mask, min_area=64)
        if not feats:
            raise RuntimeError(f"bank render produced no contour for {gesture}")
        bank.append((gesture, max(feats, key=lambda f: f.area)))
    return bank


def bank_distance(features: ContourFeatures, bank_entry: ContourFeatures) -> float:
    """Match proximity: Euclidean distance between log-scaled moment signatures."""
    return float(np.linalg.norm(features.moment_signature - bank_entry.moment_signature))


def _score(features: ContourFeatures, bank: list[tuple[GestureClass, ContourFeatures]]) -> float:
    return min(bank_distance(features, entry) for _, entry in bank)


def _passes_cache(features: ContourFeatures, cache: RegionCache) -> bool:
    entries = cache.valid_entries()
    if not entries:
        return True
    x, y, w, h = features.bbox
    cx, cy = x + w / 2.0, y + h / 2.0
    for entry in entries:
        ex, ey = entry.box.center()
        drift = ((cx - ex) ** 2 + (cy - ey) ** 2) ** 0.5
        if drift > cache.max_drift:
            continue
        area_ratio = ((w * h) / max(entry.box.area(), 1)) ** 0.5
        if area_ratio > cache.max_scale_ratio or area_ratio < 1.0 / cache.max_scale_ratio:
            continue
        return True
    return False


@dataclass(frozen=True)
class RegionPick:
    box: RegionBox
    features: ContourFeatures


@dataclass(frozen=True)
class RegionSelection:
    left: RegionPick | None
    right: RegionPick | None


def select_regions_detailed(
    frame: FrameRaster,
    cache: RegionCache,
    bank: list[tuple[GestureClass, ContourFeatures]] | None = None,
    params: VisionParams = DEFAULT_VISION_PARAMS,
) -> tuple[RegionSelection, RegionCache]:
    """Full selector returning matched contour features along with the boxes."""
    if bank is None:
        bank = contour_bank()
    mask = segment_skin(frame, params.band, params.blur_radius)
    min_area = params.min_area_frac * frame.width * frame.height
    candidates = extract_contour_features(mask, min_area)

    new_clock = cache.clock + 1
    survivors = [f for f in candidates if _passes_cache(f, cache)]
    scored = sorted(
        ((s, i) for i, f in enumerate(survivors) if (s := _score(f, bank)) <= params.max_match_distance),
        key=lambda pair: pair[0],
    )

    picks: list[RegionPick] = []
    for score, idx in scored:
        f = survivors[idx]
        box = RegionBox(*f.bbox, score=score)
        if any(box.intersects(p.box) for p in picks):
            continue
        picks.append(RegionPick(box, f))
        if len(picks) == 2:
            break

    left: RegionPick | None = None
    right: RegionPick | None = None
    if len(picks) == 2:
        a, b = sorted(picks, key=lambda p: p.box.center()[0])
        left, right = a, b
    elif len(picks) == 1:
        pick = picks[0]
        if pick.box.center()[0] < frame.width / 2.0:
            left = pick
        else:
            right = pick

    new_cache = replace(
        cache,
        clock=new_clock,
        left=CacheEntry(left.box, new_clock) if left else cache.left,
        right=CacheEntry(right.box, new_clock) if right else cache.right,
    )
    return RegionSelection(left=left, right=right), new_cache


def select_regions(
    frame: FrameRaster,
    cache: RegionCache,
    bank: list[tuple[GestureClass, ContourFeatures]] | None = None,
    params: VisionParams = DEFAULT_VISION_PARAMS,
) -> tuple[RegionBox | None, RegionBox | None, RegionCache]:
    """Left/right hand boxes (either may be absent) plus the updated cache."""
    selection, new_cache = select_regions_detailed(frame, cache, bank, params)
    return (
        selection.left.box if selection.left else None,
        selection.right.box if selection.right else None,
        new_cache,
    )


def crop_patch(frame: FrameRaster, box: RegionBox, size: int = 32) -> np.ndarray:
    """Bilinear crop-and-resize of the boxed region to (size, size, 3) in [0,1]."""
    if box.w < 2 or box.h < 2:
        raise InvalidRegionError(f"degenerate crop box: {box}")
    if box.x < 0 or box.y < 0 or box.x + box.w > frame.width or box.y + box.h > frame.height:
        raise InvalidRegionError(f"crop box outside frame: {box}")
    region = frame.as_float()[box.y : box.y + box.h, box.x : box.x + box.w]
    return bilinear_resize(region, size, size)
