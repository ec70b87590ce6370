"""The ten-class gesture recognizer behind one pluggable interface.

Two interchangeable implementations: nearest-contour-bank matching
(descriptor distances from the vision module) and a small trainable
CNN with softmax output. Pipelines depend only on ``GestureClassifier``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..vision.contours import ContourFeatures

PATCH_SIZE = 32
NUM_CLASSES = 10


@dataclass(frozen=True)
class RegionObservation:
    """A selected hand region: the resized patch plus, when the vision
    path produced them, the region's contour features."""

    patch: np.ndarray  # (32, 32, 3) float in [0, 1]
    features: ContourFeatures | None = None


class GestureClassifier(Protocol):
    """Maps a region observation to a probability vector over the ten classes."""

    def classify(self, obs: RegionObservation) -> np.ndarray: ...


def validate_patch(patch: np.ndarray) -> np.ndarray:
    if patch.shape != (PATCH_SIZE, PATCH_SIZE, 3):
        raise ValueError(f"patch must be {PATCH_SIZE}x{PATCH_SIZE}x3, got {patch.shape}")
    if not np.all(np.isfinite(patch)):
        raise ValueError("patch contains non-finite values")
    return np.asarray(patch, dtype=np.float64)


from .cnn import (  # noqa: E402
    CnnClassifier,
    CnnModel,
    ModelConfigError,
    TrainConfig,
    TrainingDivergedError,
    build_model,
    evaluate,
    forward,
    loss_and_gradients,
    train,
)
from .bank import ContourBankClassifier, descriptor_vector  # noqa: E402
from .dataset import LabeledDataset, load_dataset_dir, make_glyph_dataset, save_dataset_dir  # noqa: E402
from .weights_io import IncompatibleWeightsError, load_weights, save_weights  # noqa: E402

__all__ = [
    "PATCH_SIZE",
    "NUM_CLASSES",
    "RegionObservation",
    "GestureClassifier",
    "validate_patch",
    "CnnClassifier",
    "CnnModel",
    "ModelConfigError",
    "TrainConfig",
    "TrainingDivergedError",
    "build_model",
    "evaluate",
    "forward",
    "loss_and_gradients",
    "train",
    "ContourBankClassifier",
    "descriptor_vector",
    "LabeledDataset",
    "load_dataset_dir",
    "make_glyph_dataset",
    "save_dataset_dir",
    "IncompatibleWeightsError",
    "load_weights",
    "save_weights",
]
