"""Stochastic corruption of token streams for robustness experiments.

Models the recognizer's two failure modes as i.i.d. per-frame events:
substitution (the true pair is replaced by a uniformly random different
mapped pair) and dropout (the detection is lost entirely). Deterministic
per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import PairRecord
from .vocabulary import GesturePair, VocabularyConfig


@dataclass(frozen=True)
class NoiseModel:
    substitution_rate: float = 0.0
    dropout_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("substitution_rate", "dropout_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def perturb_stream(
    records: list[PairRecord], noise: NoiseModel, cfg: VocabularyConfig
) -> list[PairRecord]:
    """Corrupt each frame independently; frame indices are preserved."""
    rng = np.random.default_rng(noise.seed)
    mapped_pairs = sorted(cfg.pair_to_token.keys())
    out: list[PairRecord] = []
    for rec in records:
        draw_drop, draw_sub = rng.random(), rng.random()
        if rec.pair is not None and draw_drop < noise.dropout_rate:
            out.append(PairRecord(rec.frame_index, None, None, 0.0))
            continue
        if rec.pair is not None and draw_sub < noise.substitution_rate:
            others = [p for p in mapped_pairs if p != rec.pair]
            pick: GesturePair = others[int(rng.integers(0, len(others)))]
            out.append(PairRecord(rec.frame_index, pick.left, pick.right, rec.confidence))
            continue
        out.append(rec)
    return out
