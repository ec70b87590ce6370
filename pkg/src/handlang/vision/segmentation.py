"""Skin-color segmentation: blur, then threshold in HSV space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import FrameRaster, box_blur, rgb_to_hsv


@dataclass(frozen=True)
class HsvThreshold:
    """Inclusive HSV band; set hue_wrap for bands crossing 0 degrees."""

    hue_min: float
    hue_max: float
    sat_min: float
    sat_max: float
    val_min: float
    val_max: float
    hue_wrap: bool = False

    def __post_init__(self) -> None:
        if not self.hue_wrap and self.hue_min > self.hue_max:
            raise ValueError("hue_min > hue_max without hue_wrap")
        if self.sat_min > self.sat_max or self.val_min > self.val_max:
            raise ValueError("saturation/value bounds out of order")


# Bare-hand band for the synthetic skin tones; gloves need re-tuning.
DEFAULT_SKIN_BAND = HsvThreshold(
    hue_min=0.0, hue_max=50.0, sat_min=0.23, sat_max=0.68, val_min=0.35, val_max=1.0
)


def segment_skin(frame: FrameRaster, th: HsvThreshold, blur_radius: int = 2) -> np.ndarray:
    """Boolean mask of pixels whose blurred HSV lies inside the band."""
    rgb = box_blur(frame.as_float(), blur_radius)
    h, s, v = rgb_to_hsv(rgb)
    if th.hue_wrap:
        hue_ok = (h >= th.hue_min) | (h <= th.hue_max)
    else:
        hue_ok = (h >= th.hue_min) & (h <= th.hue_max)
    return hue_ok & (s >= th.sat_min) & (s <= th.sat_max) & (v >= th.val_min) & (v <= th.val_max)
