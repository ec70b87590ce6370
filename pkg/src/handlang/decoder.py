"""Debounced token stream decoding into executable instructions.

Per-frame token observations pass through a debounce filter that commits
a token only after it has been seen for a configured number of
consecutive frames (default 15). Committed tokens drive a deterministic
finite-state machine whose only transitions are the grammatically
correct ones: an unexpected token leaves the state untouched, so noise
can never assemble an instruction on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .vocabulary import (
    END_SENTINEL,
    TASK_TOKEN_KINDS,
    LanguageToken,
    TokenKind,
    VocabularyConfig,
)

# Seconds of behavior encoded by one digit token (digit 0 means indefinite).
SECONDS_PER_DIGIT = 10.0


class StreamOrderError(ValueError):
    """Raised when a stream's frame indices are not strictly increasing."""


@dataclass(frozen=True)
class TokenObservation:
    """One frame's classified token; token is None when no valid pair was detected."""

    frame_index: int
    token: LanguageToken | None
    confidence: float = 1.0


@dataclass(frozen=True)
class DebounceFilter:
    """Consecutive-frame commitment filter state.

    A token commits when it has been observed for ``threshold``
    consecutive frames while the filter is armed. Committing disarms the
    filter; it re-arms on the first frame whose token differs from the
    committed one (or is absent), so holding a gesture commits exactly
    once.
    """

    threshold: int = 15
    candidate: LanguageToken | None = None
    run_length: int = 0
    last_committed: LanguageToken | None = None
    armed: bool = True
    last_frame_index: int | None = None

    def progress(self) -> float:
        return self.run_length / self.threshold


def debounce_step(
    filt: DebounceFilter, obs: TokenObservation
) -> tuple[DebounceFilter, LanguageToken | None]:
    """Advance the filter by one observation; returns (new filter, committed token or None)."""
    if filt.last_frame_index is not None and obs.frame_index <= filt.last_frame_index:
        raise StreamOrderError(
            f"frame {obs.frame_index} does not follow frame {filt.last_frame_index}"
        )

    token = obs.token
    if token is None:
        candidate, run, prev_run = None, 0, 0
    elif token == filt.candidate:
        candidate, prev_run = token, filt.run_length
        run = min(prev_run + 1, filt.threshold)
    else:
        candidate, run, prev_run = token, 1, 0

    armed = filt.armed
    if not armed and token != filt.last_committed:
        armed = True

    committed: LanguageToken | None = None
    if armed and candidate is not None and run >= filt.threshold and prev_run < filt.threshold:
        committed = candidate
        armed = False

    new = DebounceFilter(
        threshold=filt.threshold,
        candidate=candidate,
        run_length=run,
        last_committed=committed if committed is not None else filt.last_committed,
        armed=armed,
        last_frame_index=obs.frame_index,
    )
    return new, committed


class FsmName(Enum):
    IDLE = "idle"
    GOT_STOP = "got_stop"
    GOT_CONTD = "got_contd"
    TASK_PENDING = "task_pending"
    TASK_TIMED = "task_timed"
    EXEC_PENDING = "exec_pending"
    EXEC_READY = "exec_ready"
    UPDATE_PENDING = "update_pending"
    UPDATE_DIR = "update_dir"
    UPDATE_READY = "update_ready"
    SNAP_PENDING = "snap_pending"
    SNAP_TIMED = "snap_timed"


@dataclass(frozen=True)
class FsmState:
    """Current grammar state plus whatever payload that state requires."""

    name: FsmName = FsmName.IDLE
    task: str | None = None
    duration_s: float | None = None
    program_id: int | None = None
    param_id: int | None = None
    direction: str | None = None

    def describe(self) -> str:
        payload = {
            k: v
            for k, v in (
                ("task", self.task),
                ("duration_s", self.duration_s),
                ("program_id", self.program_id),
                ("param_id", self.param_id),
                ("direction", self.direction),
            )
            if v is not None
        }
        if not payload:
            return self.name.value
        inner = ", ".join(f"{k}={v}" for k, v in payload.items())
        return f"{self.name.value}({inner})"


IDLE = FsmState()


@dataclass(frozen=True)
class TaskSwitch:
    task: str
    duration_s: float | None = None


@dataclass(frozen=True)
class ExecuteProgram:
    program_id: int


@dataclass(frozen=True)
class ParamUpdate:
    param_id: int
    direction: str  # "increase" | "decrease"


@dataclass(frozen=True)
class Snapshot:
    duration_s: float | None = None


Instruction = TaskSwitch | ExecuteProgram | ParamUpdate | Snapshot


def instruction_to_dict(ins: Instruction) -> dict:
    if isinstance(ins, TaskSwitch):
        return {"type": "task_switch", "task": ins.task, "duration_s": ins.duration_s}
    if isinstance(ins, ExecuteProgram):
        return {"type": "execute_program", "program_id": ins.program_id}
    if isinstance(ins, ParamUpdate):
        return {"type": "param_update", "param_id": ins.param_id, "direction": ins.direction}
    if isinstance(ins, Snapshot):
        return {"type": "snapshot", "duration_s": ins.duration_s}
    raise TypeError(f"not an instruction: {ins!r}")


def instruction_from_dict(d: dict) -> Instruction:
    kind = d.get("type")
    if kind == "task_switch":
        return TaskSwitch(d["task"], d.get("duration_s"))
    if kind == "execute_program":
        return ExecuteProgram(int(d["program_id"]))
    if kind == "param_update":
        return ParamUpdate(int(d["param_id"]), d["direction"])
    if kind == "snapshot":
        return Snapshot(d.get("duration_s"))
    raise ValueError(f"unknown instruction type: {kind!r}")


@dataclass(frozen=True)
class TokenCommitted:
    frame_index: int
    token: LanguageToken


@dataclass(frozen=True)
class InstructionEmitted:
    frame_index: int
    instruction: Instruction


@dataclass(frozen=True)
class StateChanged:
    frame_index: int
    before: FsmState
    after: FsmState


DecodeEvent = TokenCommitted | InstructionEmitted | StateChanged


def _digit_duration(d: int) -> float | None:
    """Digit d encodes 10*d seconds; 0 means indefinite."""
    return None if d == 0 else SECONDS_PER_DIGIT * d


def fsm_step(state: FsmState, committed: LanguageToken) -> tuple[FsmState, Instruction | None]:
    """One grammar transition on a committed token.

    Tokens with no rule in the current state self-loop (state unchanged,
    nothing emitted). STOP/CONTD restart instruction assembly from any
    state. Emitting an instruction returns the machine to IDLE.
    """
    kind = committed.kind

    # Start sentinels restart assembly everywhere.
    if kind is TokenKind.STOP:
        return FsmState(FsmName.GOT_STOP), None
    if kind is TokenKind.CONTD:
        return FsmState(FsmName.GOT_CONTD), None

    name = state.name
    if name is FsmName.GOT_STOP:
        if kind in TASK_TOKEN_KINDS:
            return FsmState(FsmName.TASK_PENDING, task=kind.value), None
        if kind is TokenKind.EXECUTE:
            return FsmState(FsmName.EXEC_PENDING), None
    elif name is FsmName.GOT_CONTD:
        if kind is TokenKind.UPDATE:
            return FsmState(FsmName.UPDATE_PENDING), None
        if kind is TokenKind.SNAPSHOT:
            return FsmState(FsmName.SNAP_PENDING), None
    elif name is FsmName.TASK_PENDING:
        if kind is TokenKind.DIGIT:
            return FsmState(
                FsmName.TASK_TIMED, task=state.task, duration_s=_digit_duration(committed.digit)
            ), None
        if kind is END_SENTINEL:
            return IDLE, TaskSwitch(state.task)
    elif name is FsmName.TASK_TIMED:
        if kind is END_SENTINEL:
            return IDLE, TaskSwitch(state.task, state.duration_s)
    elif name is FsmName.EXEC_PENDING:
        if kind is TokenKind.DIGIT:
            return FsmState(FsmName.EXEC_READY, program_id=committed.digit), None
    elif name is FsmName.EXEC_READY:
        if kind is END_SENTINEL:
            return IDLE, ExecuteProgram(state.program_id)
    elif name is FsmName.UPDATE_PENDING:
        if kind is TokenKind.DIGIT:
            return FsmState(FsmName.UPDATE_DIR, param_id=committed.digit), None
    elif name is FsmName.UPDATE_DIR:
        if kind in (TokenKind.INCREASE, TokenKind.DECREASE):
            return FsmState(
                FsmName.UPDATE_READY, param_id=state.param_id, direction=kind.value
            ), None
    elif name is FsmName.UPDATE_READY:
        if kind is END_SENTINEL:
            return IDLE, ParamUpdate(state.param_id, state.direction)
    elif name is FsmName.SNAP_PENDING:
        if kind is TokenKind.DIGIT:
            return FsmState(
                FsmName.SNAP_TIMED, duration_s=_digit_duration(committed.digit)
            ), None
        if kind is END_SENTINEL:
            return IDLE, Snapshot()
    elif name is FsmName.SNAP_TIMED:
        if kind is END_SENTINEL:
            return IDLE, Snapshot(state.duration_s)

    return state, None


@dataclass
class DecoderState:
    """Mutable per-session decoder: debounce filter plus FSM state."""

    filter: DebounceFilter
    fsm: FsmState = IDLE

    @classmethod
    def fresh(cls, cfg: VocabularyConfig) -> "DecoderState":
        return cls(filter=DebounceFilter(threshold=cfg.debounce_frames))

    def step(self, obs: TokenObservation) -> list[DecodeEvent]:
        """Advance by one observation, returning the events it produced."""
        events: list[DecodeEvent] = []
        self.filter, committed = debounce_step(self.filter, obs)
        if committed is None:
            return events
        events.append(TokenCommitted(obs.frame_index, committed))
        before = self.fsm
        self.fsm, emitted = fsm_step(before, committed)
        if self.fsm != before:
            events.append(StateChanged(obs.frame_index, before, self.fsm))
        if emitted is not None:
            events.append(InstructionEmitted(obs.frame_index, emitted))
        return events


def decode_stream(
    cfg: VocabularyConfig, stream: list[TokenObservation] | tuple[TokenObservation, ...]
) -> tuple[list[Instruction], list[DecodeEvent]]:
    """Fold the debounce filter and FSM over a whole stream from fresh state."""
    state = DecoderState.fresh(cfg)
    events: list[DecodeEvent] = []
    instructions: list[Instruction] = []
    for obs in stream:
        for ev in state.step(obs):
            events.append(ev)
            if isinstance(ev, InstructionEmitted):
                instructions.append(ev.instruction)
    return instructions, events
