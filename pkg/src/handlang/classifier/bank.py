"""Nearest-contour-bank gesture classification.

Scores a region against the ten reference glyph contours using a
descriptor built from the log-scaled moment signature plus hull and
topology statistics (solidity, deep-defect count, hole fraction,
deepest-defect depth, x-skew). Distances convert to a probability
vector with a softmax so the interface matches the CNN's output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vision.contours import ContourFeatures, extract_contour_features
from ..vision.regions import contour_bank
from ..vision.segmentation import DEFAULT_SKIN_BAND, HsvThreshold
from ..vision.raster import rgb_to_hsv
from ..vocabulary import GestureClass

# Weights put the topology statistics on the same footing as the
# signature components; calibrated on rotated/rescaled glyph renders.
_W_SOLIDITY = 5.0
_W_DEFECTS = 2.0
_W_HOLE = 8.0
_W_MAXDEF = 3.0
_W_SKEW = 50.0


def descriptor_vector(features: ContourFeatures) -> np.ndarray:
    """Matching descriptor for one region contour."""
    sig = features.moment_signature
    max_defect = max((d.depth for d in features.defects), default=0.0)
    scale = np.sqrt(max(features.area, 1.0))
    return np.concatenate(
        [
            sig[:4],
            [
                _W_SOLIDITY * features.solidity,
                _W_DEFECTS * features.deep_defect_count(),
                _W_HOLE * features.hole_area_frac,
                _W_MAXDEF * max_defect / scale,
                _W_SKEW * features.x_skew,
            ],
        ]
    )


class ContourBankClassifier:
    """GestureClassifier that matches contours against the glyph bank."""

    def __init__(self, temperature: float = 0.6, band: HsvThreshold = DEFAULT_SKIN_BAND):
        self.temperature = temperature
        self.band = band
        entries = contour_bank()
        self.classes = [g for g, _ in entries]
        self.bank_vectors = np.stack([descriptor_vector(f) for _, f in entries])

    def classify(self, obs) -> np.ndarray:
        features = obs.features
        if features is None:
            features = self._features_from_patch(obs.patch)
        probs = np.full(len(self.classes), 1.0 / len(self.classes))
        if features is not None:
            v = descriptor_vector(features)
            dists = np.linalg.norm(self.bank_vectors - v[None, :], axis=1)
            z = -dists / self.temperature
            z -= z.max()
            e = np.exp(z)
            probs = e / e.sum()
        # Bank order is GestureClass order; keep the contract explicit.
        out = np.zeros(len(self.classes))
        for p, g in zip(probs, self.classes):
            out[int(g)] = p
        return out

    def _features_from_patch(self, patch: np.ndarray) -> ContourFeatures | None:
        h, s, v = rgb_to_hsv(np.asarray(patch, dtype=np.float64))
        band = self.band
        if band.hue_wrap:
            hue_ok = (h >= band.hue_min) | (h <= band.hue_max)
        else:
            hue_ok = (h >= band.hue_min) & (h <= band.hue_max)
        mask = hue_ok & (s >= band.sat_min) & (s <= band.sat_max) & (v >= band.val_min) & (
            v <= band.val_max
        )
        regions = extract_contour_features(mask, min_area=16)
        if not regions:
            return None
        return max(regions, key=lambda f: f.area)
