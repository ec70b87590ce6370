"""Token stream and instruction log file formats (JSON lines).

A token stream record is one frame's gesture-pair observation:
    {"frame_index": 17, "left": "digit_0", "right": "digit_0", "confidence": 0.93}
Absent detections carry null gestures. An instruction log record is
    {"frame_index": 120, "instruction": {"type": "task_switch", ...}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .decoder import Instruction, TokenObservation, instruction_from_dict, instruction_to_dict
from .vocabulary import GestureClass, GesturePair, VocabularyConfig, map_pair


@dataclass(frozen=True)
class PairRecord:
    """One frame of the on-disk stream: the raw gesture pair, if any."""

    frame_index: int
    left: GestureClass | None
    right: GestureClass | None
    confidence: float = 1.0

    @property
    def pair(self) -> GesturePair | None:
        if self.left is None or self.right is None:
            return None
        return GesturePair(self.left, self.right)

    def to_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "left": self.left.spelling if self.left is not None else None,
            "right": self.right.spelling if self.right is not None else None,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairRecord":
        def g(key: str) -> GestureClass | None:
            v = d.get(key)
            return GestureClass.from_spelling(v) if v is not None else None

        return cls(
            frame_index=int(d["frame_index"]),
            left=g("left"),
            right=g("right"),
            confidence=float(d.get("confidence", 1.0)),
        )

    def to_observation(self, cfg: VocabularyConfig) -> TokenObservation:
        pair = self.pair
        token = map_pair(cfg, pair) if pair is not None else None
        return TokenObservation(self.frame_index, token, self.confidence)


def dump_stream(records: list[PairRecord]) -> str:
    return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in records) + "\n"


def parse_stream(text: str) -> list[PairRecord]:
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(PairRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"bad stream record on line {line_no}: {exc}") from exc
    return records


def save_stream(records: list[PairRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_stream(records))


def load_stream(path: str) -> list[PairRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_stream(fh.read())


def observations(records: list[PairRecord], cfg: VocabularyConfig) -> list[TokenObservation]:
    return [r.to_observation(cfg) for r in records]


def dump_instruction_log(entries: list[tuple[int, Instruction]]) -> str:
    lines = [
        json.dumps(
            {"frame_index": frame, "instruction": instruction_to_dict(ins)}, sort_keys=True
        )
        for frame, ins in entries
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_instruction_log(text: str) -> list[tuple[int, Instruction]]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        out.append((int(d["frame_index"]), instruction_from_dict(d["instruction"])))
    return out


def tokens_for_instruction(ins: Instruction) -> list:
    """The sentinel-delimited token script that produces one instruction."""
    from . import vocabulary as v
    from .decoder import ExecuteProgram, ParamUpdate, Snapshot, TaskSwitch

    def duration_digit(duration_s):
        return [] if duration_s is None else [v.digit(int(round(duration_s / 10.0)))]

    if isinstance(ins, TaskSwitch):
        task_token = v.LanguageToken(v.TokenKind(ins.task))
        return [v.STOP, task_token, *duration_digit(ins.duration_s), v.GO]
    if isinstance(ins, ExecuteProgram):
        return [v.STOP, v.EXECUTE, v.digit(ins.program_id), v.GO]
    if isinstance(ins, ParamUpdate):
        direction = v.INCREASE if ins.direction == "increase" else v.DECREASE
        return [v.CONTD, v.UPDATE, v.digit(ins.param_id), direction, v.GO]
    if isinstance(ins, Snapshot):
        return [v.CONTD, v.SNAPSHOT, *duration_digit(ins.duration_s), v.GO]
    raise TypeError(f"not an instruction: {ins!r}")


def encode_script(
    cfg: VocabularyConfig,
    tokens: list,
    dwell: int = 20,
    gap: int = 5,
    start_frame: int = 0,
    confidence: float = 1.0,
) -> list[PairRecord]:
    """Clean stream for a token script: each token held ``dwell`` frames
    with ``gap`` absent frames between tokens."""
    records: list[PairRecord] = []
    frame = start_frame
    for i, token in enumerate(tokens):
        pairs = cfg.pairs_for(token)
        if not pairs:
            raise ValueError(f"token {token} has no gesture pair in this config")
        pair = pairs[0]
        for _ in range(dwell):
            records.append(PairRecord(frame, pair.left, pair.right, confidence))
            frame += 1
        if gap and i != len(tokens) - 1:
            for _ in range(gap):
                records.append(PairRecord(frame, None, None, 0.0))
                frame += 1
    return records
