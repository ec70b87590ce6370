"""Simulated robot that applies decoded instructions on a tick-based mission clock.

Task switches suspend the numbered program for an atomic behavior
(optionally timed, resuming the program afterwards); parameter updates
step a numbered tunable through its pre-declared value list; snapshot
instructions schedule periodic virtual captures without interrupting
whatever is running.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .decoder import ExecuteProgram, Instruction, ParamUpdate, Snapshot, TaskSwitch
from .vocabulary import VocabularyConfig

MOVE_SPEED_MPS = 0.5
PROGRAM_SPEED_MPS = 0.25

# Tolerance for mission-clock comparisons; repeated dt addition drifts
# a few ulps relative to single-shot deadline arithmetic.
_TIME_EPS = 1e-9

_MOVE_DIRECTIONS = {
    "move_left": (-1.0, 0.0, 0.0),
    "move_right": (1.0, 0.0, 0.0),
    "move_up": (0.0, 0.0, 1.0),
    "move_down": (0.0, 0.0, -1.0),
}


class UnknownIdError(ValueError):
    """Instruction references a program or parameter id the config does not declare."""


@dataclass(frozen=True)
class RobotMode:
    """Either running a numbered program or performing an atomic task."""

    kind: str  # "program" | "task"
    program_id: int | None = None
    task: str | None = None
    deadline_s: float | None = None
    resume_program: int | None = None

    def describe(self) -> str:
        if self.kind == "program":
            return f"program[{self.program_id}]"
        timed = f" until t={self.deadline_s:g}s" if self.deadline_s is not None else ""
        return f"task[{self.task}]{timed}"


def program_mode(program_id: int) -> RobotMode:
    return RobotMode(kind="program", program_id=program_id)


def task_mode(task: str, deadline_s: float | None, resume_program: int | None) -> RobotMode:
    return RobotMode(kind="task", task=task, deadline_s=deadline_s, resume_program=resume_program)


@dataclass(frozen=True)
class ParameterState:
    name: str
    values: tuple[float, ...]
    index: int

    @property
    def value(self) -> float:
        return self.values[self.index]


@dataclass(frozen=True)
class LogRecord:
    """One append-only mission log entry."""

    mission_time_s: float
    kind: str  # instruction_applied | snapshot_fired | task_expired | parameter_changed
    detail: dict

    def to_dict(self) -> dict:
        return {"t": self.mission_time_s, "kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class RobotState:
    """Full simulated robot state; a value, transformed purely by apply/tick."""

    mode: RobotMode
    parameters: dict[int, ParameterState]
    mission_time_s: float = 0.0
    snapshot_until_s: float | None = None
    snapshot_next_due_s: float | None = None
    snapshot_period_s: float = 1.0
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    programs: dict[int, str] = field(default_factory=dict)

    @classmethod
    def initial(cls, cfg: VocabularyConfig, program_id: int = 0) -> "RobotState":
        params = {
            pid: ParameterState(spec.name, spec.values, spec.index)
            for pid, spec in cfg.parameters.items()
        }
        return cls(
            mode=program_mode(program_id),
            parameters=params,
            snapshot_period_s=cfg.snapshot_period_s,
            programs=dict(cfg.programs),
        )

    def snapshot_active(self) -> bool:
        return self.snapshot_next_due_s is not None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.describe(),
            "mission_time_s": round(self.mission_time_s, 6),
            "position": [round(c, 6) for c in self.position],
            "parameters": {
                str(pid): {"name": p.name, "value": p.value, "index": p.index}
                for pid, p in sorted(self.parameters.items())
            },
            "snapshot_until_s": self.snapshot_until_s,
            "snapshot_next_due_s": self.snapshot_next_due_s,
        }


def apply_instruction(state: RobotState, ins: Instruction) -> tuple[RobotState, list[LogRecord]]:
    """Apply one decoded instruction; pure, returns the new state and log records."""
    t = state.mission_time_s
    records = [LogRecord(t, "instruction_applied", {"instruction": _ins_detail(ins)})]

    if isinstance(ins, TaskSwitch):
        if state.mode.kind == "program":
            resume = state.mode.program_id
        else:
            resume = state.mode.resume_program
        deadline = t + ins.duration_s if ins.duration_s is not None else None
        return replace(state, mode=task_mode(ins.task, deadline, resume)), records

    if isinstance(ins, ExecuteProgram):
        if ins.program_id not in state.programs:
            raise UnknownIdError(f"unknown program id: {ins.program_id}")
        return replace(state, mode=program_mode(ins.program_id)), records

    if isinstance(ins, ParamUpdate):
        if ins.param_id not in state.parameters:
            raise UnknownIdError(f"unknown parameter id: {ins.param_id}")
        param = state.parameters[ins.param_id]
        step = 1 if ins.direction == "increase" else -1
        new_index = min(max(param.index + step, 0), len(param.values) - 1)
        new_param = replace(param, index=new_index)
        params = dict(state.parameters)
        params[ins.param_id] = new_param
        records.append(
            LogRecord(
                t,
                "parameter_changed",
                {
                    "param_id": ins.param_id,
                    "name": param.name,
                    "index": new_index,
                    "value": new_param.value,
                    "clamped": new_index == param.index,
                },
            )
        )
        return replace(state, parameters=params), records

    if isinstance(ins, Snapshot):
        # First capture one period into the window, then every period while
        # the due time stays inside it: a T-second window yields exactly
        # floor(T / period) captures.
        until = t + ins.duration_s if ins.duration_s is not None else None
        next_due = t + state.snapshot_period_s
        if until is not None and next_due > until + _TIME_EPS:
            until = None
            next_due = None
        return replace(state, snapshot_until_s=until, snapshot_next_due_s=next_due), records

    raise TypeError(f"not an instruction: {ins!r}")


def _ins_detail(ins: Instruction) -> dict:
    from .decoder import instruction_to_dict

    return instruction_to_dict(ins)


def _velocity(mode: RobotMode) -> tuple[float, float, float]:
    if mode.kind == "task":
        return _MOVE_DIRECTIONS.get(mode.task, (0.0, 0.0, 0.0))
    return (0.0, 0.0, 0.0)


def _program_position(program_id: int, t: float) -> tuple[float, float]:
    # Declarative stub: each program loops a circle whose radius encodes its id.
    radius = 1.0 + program_id
    omega = PROGRAM_SPEED_MPS / radius
    return (radius * math.cos(omega * t), radius * math.sin(omega * t))


def tick(state: RobotState, dt: float) -> tuple[RobotState, list[LogRecord]]:
    """Advance mission time by dt seconds, firing snapshots and task expiries."""
    if dt <= 0:
        raise ValueError(f"tick needs dt > 0, got {dt}")

    records: list[LogRecord] = []
    t0 = state.mission_time_s
    t1 = t0 + dt

    # Snapshot effects due within this tick and inside the window.
    next_due = state.snapshot_next_due_s
    until = state.snapshot_until_s
    while (
        next_due is not None
        and next_due <= t1 + _TIME_EPS
        and (until is None or next_due <= until + _TIME_EPS)
    ):
        # Stamp at the scheduled time, clamped into this tick: repeated dt
        # addition can leave t1 a few ulps short of the nominal due time.
        records.append(
            LogRecord(
                min(next_due, t1),
                "snapshot_fired",
                {"path": f"virtual://snapshots/t{next_due:012.3f}.png"},
            )
        )
        next_due = next_due + state.snapshot_period_s
    if until is not None and next_due is not None and next_due > until + _TIME_EPS:
        next_due = None
        until = None

    # Task expiry restores the suspended program (or hovers in place).
    mode = state.mode
    expired_at: float | None = None
    if mode.kind == "task" and mode.deadline_s is not None and mode.deadline_s <= t1 + _TIME_EPS:
        expired_at = mode.deadline_s
        if mode.resume_program is not None:
            new_mode = program_mode(mode.resume_program)
        else:
            new_mode = task_mode("hover", None, None)
        records.append(
            LogRecord(
                min(expired_at, t1),
                "task_expired",
                {"task": mode.task, "resumed": new_mode.describe()},
            )
        )
    else:
        new_mode = mode

    # Position integrates the active-mode velocity; move tasks translate,
    # programs trace their waypoint loop, hover/follow hold station.
    pos = state.position
    if mode.kind == "task":
        active_for = min(dt, (expired_at - t0) if expired_at is not None else dt)
        vx, vy, vz = _velocity(mode)
        pos = (
            pos[0] + vx * MOVE_SPEED_MPS * active_for,
            pos[1] + vy * MOVE_SPEED_MPS * active_for,
            pos[2] + vz * MOVE_SPEED_MPS * active_for,
        )
    elif mode.kind == "program":
        x, y = _program_position(mode.program_id, t1)
        pos = (x, y, pos[2])

    new_state = replace(
        state,
        mission_time_s=t1,
        snapshot_next_due_s=next_due,
        snapshot_until_s=until,
        mode=new_mode,
        position=pos,
    )
    records.sort(key=lambda r: r.mission_time_s)
    return new_state, records


def snapshot_schedule_report(state: RobotState) -> str:
    """Human-readable summary of the snapshot schedule; no state change."""
    if not state.snapshot_active():
        return "no snapshots scheduled"
    period = state.snapshot_period_s
    if state.snapshot_until_s is None:
        return (
            f"snapshots every {period:g}s until further notice "
            f"(next due t={state.snapshot_next_due_s:g}s)"
        )
    remaining = 0
    due = state.snapshot_next_due_s
    while due is not None and due <= state.snapshot_until_s + _TIME_EPS:
        remaining += 1
        due += period
    return (
        f"snapshots every {period:g}s, window closes t={state.snapshot_until_s:g}s, "
        f"{remaining} remaining"
    )


@dataclass
class MissionLog:
    """Append-only mission record; timestamps are non-decreasing."""

    records: list[LogRecord] = field(default_factory=list)

    def extend(self, records: list[LogRecord]) -> None:
        for rec in records:
            if self.records and rec.mission_time_s < self.records[-1].mission_time_s:
                raise ValueError("mission log timestamps must be non-decreasing")
            self.records.append(rec)

    def to_jsonl(self) -> str:
        import json

        return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)
