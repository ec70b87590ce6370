"""Region selection for hand gestures on synthetic frames.

Implements the four-step selector: blur + HSV skin segmentation,
contour extraction with hull/defect/curvature features, cache-based
outlier rejection, and contour-bank matching; plus the synthetic frame
renderer that doubles as the test and dataset substrate.
"""

from .raster import FrameRaster, bilinear_resize, box_blur, rgb_to_hsv
from .segmentation import DEFAULT_SKIN_BAND, HsvThreshold, segment_skin
from .contours import (
    ContourFeatures,
    ConvexityDefect,
    extract_contour_features,
    hu_invariants,
    label_components,
    moment_signature_from_mask,
    trace_boundary,
)
from .glyphs import GLYPH_SHAPES, raster_glyph
from .regions import (
    InvalidRegionError,
    RegionBox,
    RegionCache,
    VisionParams,
    contour_bank,
    crop_patch,
    select_regions,
    select_regions_detailed,
)
from .synthetic import (
    Distractor,
    HandPlacement,
    InvalidSceneError,
    SceneSpec,
    render_synthetic_frame,
)

__all__ = [
    "FrameRaster",
    "bilinear_resize",
    "box_blur",
    "rgb_to_hsv",
    "DEFAULT_SKIN_BAND",
    "HsvThreshold",
    "segment_skin",
    "ContourFeatures",
    "ConvexityDefect",
    "extract_contour_features",
    "hu_invariants",
    "label_components",
    "moment_signature_from_mask",
    "trace_boundary",
    "GLYPH_SHAPES",
    "raster_glyph",
    "InvalidRegionError",
    "RegionBox",
    "RegionCache",
    "VisionParams",
    "contour_bank",
    "crop_patch",
    "select_regions",
    "select_regions_detailed",
    "Distractor",
    "HandPlacement",
    "InvalidSceneError",
    "SceneSpec",
    "render_synthetic_frame",
]
