"""Session-oriented streaming pipeline service.

One session owns a decoder, a simulated robot, and (for the frame path)
a region cache plus a classifier. Inputs are either pre-classified
gesture-pair observations or PNG frames; outputs are ordered JSON
messages: state updates with debounce progress, committed tokens,
emitted instructions, robot state deltas, and metrics.

The same core serves the TCP socket protocol and in-process callers
(the CLI replay path), so offline decoding and live sessions share one
code path. Messages for a session are a deterministic function of its
inputs in order.
"""

from __future__ import annotations

import base64
import json
import socketserver
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from .classifier import CnnClassifier, ContourBankClassifier, GestureClassifier, RegionObservation
from .decoder import (
    DecoderState,
    Instruction,
    InstructionEmitted,
    StreamOrderError,
    TokenCommitted,
    instruction_from_dict,
    instruction_to_dict,
)
from .executor import MissionLog, RobotState, apply_instruction, tick
from .streams import PairRecord
from .vision import FrameRaster, RegionCache, crop_patch, select_regions_detailed
from .vocabulary import (
    GestureClass,
    LanguageToken,
    VocabularyConfig,
    config_from_text,
    default_vocabulary,
    validate_config,
)

PROTOCOL_VERSION = 1
DEFAULT_FRAME_PERIOD_S = 1.0 / 15.0


class ServiceError(Exception):
    """Rejected request; carries a machine-readable error payload."""

    def __init__(self, error: str, detail=None):
        super().__init__(error)
        self.error = error
        self.detail = detail

    def to_message(self, session_id: str | None = None) -> dict:
        return make_message(
            "error", session_id=session_id, payload={"error": self.error, "detail": self.detail}
        )


def make_message(
    msg_type: str, session_id: str | None = None, frame_index: int | None = None, payload=None
) -> dict:
    return {
        "type": msg_type,
        "session_id": session_id,
        "frame_index": frame_index,
        "payload": payload if payload is not None else {},
    }


@dataclass(frozen=True)
class MetricsReport:
    """Decode and recognition accuracy against a known ground truth."""

    total_instructions_attempted: int | None
    successfully_decoded: int | None
    instruction_accuracy_pct: float | None
    total_gestures: int | None
    correctly_recognized_gestures: int | None
    gesture_accuracy_pct: float | None
    unintended_instructions: int | None = None

    @staticmethod
    def pct(total: int, hits: int) -> float | None:
        if total <= 0:
            return None
        return round(100.0 * hits / total, 1)

    @classmethod
    def from_counts(
        cls,
        attempted: int | None = None,
        decoded: int | None = None,
        total_gestures: int | None = None,
        correct_gestures: int | None = None,
        unintended: int | None = None,
    ) -> "MetricsReport":
        return cls(
            total_instructions_attempted=attempted,
            successfully_decoded=decoded,
            instruction_accuracy_pct=cls.pct(attempted, decoded)
            if attempted is not None and decoded is not None
            else None,
            total_gestures=total_gestures,
            correctly_recognized_gestures=correct_gestures,
            gesture_accuracy_pct=cls.pct(total_gestures, correct_gestures)
            if total_gestures is not None and correct_gestures is not None
            else None,
            unintended_instructions=unintended,
        )

    def to_dict(self) -> dict:
        def fmt(v):
            return v if v is not None else "n/a"

        return {
            "total_instructions_attempted": fmt(self.total_instructions_attempted),
            "successfully_decoded": fmt(self.successfully_decoded),
            "instruction_accuracy_pct": fmt(self.instruction_accuracy_pct),
            "total_gestures": fmt(self.total_gestures),
            "correctly_recognized_gestures": fmt(self.correctly_recognized_gestures),
            "gesture_accuracy_pct": fmt(self.gesture_accuracy_pct),
            "unintended_instructions": fmt(self.unintended_instructions),
        }


def match_in_order(expected: list[Instruction], emitted: list[Instruction]) -> tuple[int, int]:
    """(matched count, unintended count): greedy in-order subsequence match.

    The scan position advances only past successful matches, so one
    missing instruction does not starve the ones after it.
    """
    matched = 0
    pos = 0
    for ins in expected:
        j = pos
        while j < len(emitted) and emitted[j] != ins:
            j += 1
        if j < len(emitted):
            matched += 1
            pos = j + 1
    return matched, len(emitted) - matched


@dataclass
class Session:
    id: str
    cfg: VocabularyConfig
    classifier_name: str
    classifier: GestureClassifier | None
    decoder: DecoderState
    robot: RobotState
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S
    mission_log: MissionLog = field(default_factory=MissionLog)
    cache: RegionCache = field(default_factory=RegionCache)
    last_frame_index: int | None = None
    observed_tokens: list[tuple[int, LanguageToken | None]] = field(default_factory=list)
    emitted: list[tuple[int, Instruction]] = field(default_factory=list)
    message_log: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class PipelineService:
    """In-process service core; the socket server is a line-JSON shim over it."""

    def __init__(self, frame_period_s: float = DEFAULT_FRAME_PERIOD_S):
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self.frame_period_s = frame_period_s

    # -- session management -------------------------------------------------

    def create_session(
        self,
        config: VocabularyConfig | None = None,
        classifier: str = "contour",
        cnn_model=None,
    ) -> tuple[str, list[dict]]:
        cfg = config if config is not None else default_vocabulary()
        violations = validate_config(cfg)
        if violations:
            raise ServiceError("invalid-config", violations)
        if classifier == "cnn":
            if cnn_model is None:
                raise ServiceError("missing-model", "cnn classifier needs a trained model")
            clf: GestureClassifier | None = CnnClassifier(cnn_model)
        elif classifier == "contour":
            clf = ContourBankClassifier()
        elif classifier == "none":
            clf = None  # token-input-only session
        else:
            raise ServiceError("unknown-classifier", classifier)

        session = Session(
            id=uuid.uuid4().hex,
            cfg=cfg,
            classifier_name=classifier,
            classifier=clf,
            decoder=DecoderState.fresh(cfg),
            robot=RobotState.initial(cfg),
            frame_period_s=self.frame_period_s,
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        msg = make_message(
            "state_update",
            session_id=session.id,
            payload={
                "event": "session_created",
                "classifier": classifier,
                "fsm_state": session.decoder.fsm.describe(),
                "debounce": {"run_length": 0, "threshold": cfg.debounce_frames},
                "robot": session.robot.to_dict(),
            },
        )
        session.message_log.append(msg)
        return session.id, [msg]

    def _session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError("unknown-session", session_id)
        return session

    def close_session(self, session_id: str) -> None:
        with self._registry_lock:
            self._sessions.pop(session_id, None)

    # -- ingestion ----------------------------------------------------------

    def ingest_tokens(self, session_id: str, records: list[PairRecord]) -> list[dict]:
        session = self._session(session_id)
        out: list[dict] = []
        with session.lock:
            for rec in records:
                out.extend(self._ingest_observation(session, rec))
            session.message_log.extend(out)
        return out

    def ingest_frame(self, session_id: str, frame_index: int, frame: FrameRaster) -> list[dict]:
        session = self._session(session_id)
        with session.lock:
            if session.classifier is None:
                raise ServiceError("no-classifier", "session accepts token input only")
            selection, session.cache = select_regions_detailed(frame, session.cache)
            rec = self._classify_selection(session, frame, frame_index, selection)
            out = self._ingest_observation(session, rec, selection)
            session.message_log.extend(out)
        return out

    def _classify_selection(self, session, frame, frame_index, selection) -> PairRecord:
        sides: dict[str, tuple[GestureClass, float] | None] = {"left": None, "right": None}
        for side in ("left", "right"):
            pick = getattr(selection, side)
            if pick is None:
                continue
            patch = crop_patch(frame, pick.box)
            probs = session.classifier.classify(RegionObservation(patch, pick.features))
            idx = int(np.argmax(probs))
            sides[side] = (GestureClass(idx), float(probs[idx]))
        if sides["left"] and sides["right"]:
            conf = min(sides["left"][1], sides["right"][1])
            return PairRecord(frame_index, sides["left"][0], sides["right"][0], conf)
        return PairRecord(frame_index, None, None, 0.0)

    def _ingest_observation(
        self, session: Session, rec: PairRecord, selection=None
    ) -> list[dict]:
        if session.last_frame_index is not None and rec.frame_index <= session.last_frame_index:
            raise ServiceError(
                "out-of-order-frame",
                {"frame_index": rec.frame_index, "last": session.last_frame_index},
            )
        session.last_frame_index = rec.frame_index

        obs = rec.to_observation(session.cfg)
        session.observed_tokens.append((rec.frame_index, obs.token))
        try:
            events = session.decoder.step(obs)
        except StreamOrderError as exc:
            raise ServiceError("stream-order", str(exc)) from exc

        out: list[dict] = []
        robot_changed = False
        for ev in events:
            if isinstance(ev, TokenCommitted):
                out.append(
                    make_message(
                        "token_committed",
                        session_id=session.id,
                        frame_index=ev.frame_index,
                        payload={"token": ev.token.spelling},
                    )
                )
            elif isinstance(ev, InstructionEmitted):
                session.emitted.append((ev.frame_index, ev.instruction))
                session.robot, records = apply_instruction(session.robot, ev.instruction)
                session.mission_log.extend(records)
                robot_changed = True
                out.append(
                    make_message(
                        "instruction_emitted",
                        session_id=session.id,
                        frame_index=ev.frame_index,
                        payload={"instruction": instruction_to_dict(ev.instruction)},
                    )
                )

        session.robot, tick_records = tick(session.robot, session.frame_period_s)
        session.mission_log.extend(tick_records)
        if tick_records:
            robot_changed = True

        state_payload = {
            "fsm_state": session.decoder.fsm.describe(),
            "mission_time_s": round(session.robot.mission_time_s, 6),
            "debounce": {
                "run_length": session.decoder.filter.run_length,
                "threshold": session.decoder.filter.threshold,
                "candidate": session.decoder.filter.candidate.spelling
                if session.decoder.filter.candidate
                else None,
            },
            "observation": {
                "left": rec.left.spelling if rec.left else None,
                "right": rec.right.spelling if rec.right else None,
                "token": obs.token.spelling if obs.token else None,
                "confidence": rec.confidence,
            },
        }
        if selection is not None:
            state_payload["regions"] = {
                side: getattr(selection, side).box.to_dict()
                if getattr(selection, side)
                else None
                for side in ("left", "right")
            }
        out.append(
            make_message(
                "state_update",
                session_id=session.id,
                frame_index=rec.frame_index,
                payload=state_payload,
            )
        )
        if robot_changed:
            out.append(
                make_message(
                    "robot_state",
                    session_id=session.id,
                    frame_index=rec.frame_index,
                    payload=session.robot.to_dict(),
                )
            )
        return out

    # -- metrics ------------------------------------------------------------

    def metrics_report(
        self,
        session_id: str,
        expected_instructions: list[Instruction] | None,
        expected_tokens: list[tuple[int, LanguageToken | None]] | None = None,
    ) -> MetricsReport:
        session = self._session(session_id)
        with session.lock:
            emitted = [ins for _, ins in session.emitted]
            observed = dict(session.observed_tokens)

        attempted = decoded = unintended = None
        if expected_instructions is not None:
            attempted = len(expected_instructions)
            decoded, unintended = match_in_order(expected_instructions, emitted)

        total_gestures = correct = None
        if expected_tokens is not None:
            total_gestures = len(expected_tokens)
            correct = sum(
                1 for frame, token in expected_tokens if observed.get(frame) == token
            )
        return MetricsReport.from_counts(
            attempted, decoded, total_gestures, correct, unintended
        )

    def message_log(self, session_id: str) -> list[dict]:
        session = self._session(session_id)
        with session.lock:
            return list(session.message_log)

    def emitted_instructions(self, session_id: str) -> list[tuple[int, Instruction]]:
        session = self._session(session_id)
        with session.lock:
            return list(session.emitted)

    def mission_log(self, session_id: str) -> MissionLog:
        return self._session(session_id).mission_log

    # -- protocol dispatch ----------------------------------------------------

    def handle_message(self, msg: dict) -> list[dict]:
        """Dispatch one protocol message; always returns reply messages."""
        if not isinstance(msg, dict) or "type" not in msg:
            return [ServiceError("malformed-message", "missing type").to_message()]
        msg_type = msg.get("type")
        session_id = msg.get("session_id")
        payload = msg.get("payload") or {}
        try:
            if msg_type == "hello":
                return [
                    make_message(
                        "hello",
                        payload={"protocol": PROTOCOL_VERSION, "service": "handlang"},
                    )
                ]
            if msg_type == "create_session":
                cfg = None
                if payload.get("config_text"):
                    cfg, violations = config_from_text(payload["config_text"])
                    if violations:
                        raise ServiceError("invalid-config", violations)
                _, messages = self.create_session(
                    config=cfg, classifier=payload.get("classifier", "contour")
                )
                return messages
            if msg_type == "ingest_tokens":
                records = [PairRecord.from_dict(d) for d in payload.get("frames", [])]
                return self.ingest_tokens(session_id, records)
            if msg_type == "ingest_frame":
                frame = FrameRaster.from_png_bytes(
                    base64.b64decode(payload["png_base64"])
                )
                return self.ingest_frame(session_id, int(msg.get("frame_index")), frame)
            if msg_type == "metrics":
                expected = payload.get("expected_instructions")
                instructions = (
                    [instruction_from_dict(d) for d in expected] if expected is not None else None
                )
                tokens = None
                if payload.get("expected_tokens") is not None:
                    tokens = [
                        (
                            int(t["frame_index"]),
                            LanguageToken.from_spelling(t["token"]) if t.get("token") else None,
                        )
                        for t in payload["expected_tokens"]
                    ]
                report = self.metrics_report(session_id, instructions, tokens)
                return [
                    make_message("metrics", session_id=session_id, payload=report.to_dict())
                ]
            raise ServiceError("unknown-message-type", msg_type)
        except ServiceError as exc:
            return [exc.to_message(session_id)]
        except (KeyError, ValueError, TypeError) as exc:
            return [ServiceError("bad-request", str(exc)).to_message(session_id)]


# ---------------------------------------------------------------------------
# socket transport: one JSON message per line, bidirectional


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        service: PipelineService = self.server.service  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.strip()
            if not line:
                continue
            try:
                msg = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                replies = [ServiceError("malformed-json", str(exc)).to_message()]
            else:
                replies = service.handle_message(msg)
            for reply in replies:
                self.wfile.write(json.dumps(reply, sort_keys=True).encode("utf-8") + b"\n")
            self.wfile.flush()


class PipelineServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 7787, service=None):
        self.service = service or PipelineService()
        super().__init__((host, port), _Handler)


def serve(host: str = "127.0.0.1", port: int = 7787) -> None:
    """Run the socket service until interrupted."""
    with PipelineServer(host, port) as server:
        addr = server.server_address
        print(f"handlang service listening on {addr[0]}:{addr[1]}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
