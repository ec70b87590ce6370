"""Gesture classes, the pair-to-token mapping, and the editable vocabulary config.

The ten gesture classes are the recognizer's output alphabet; ordered
(left hand, right hand) pairs of them map to language tokens. Everything
the decoder and executor need to know about the instruction language
(token table, numbered programs, numbered parameters, debounce depth,
snapshot rate) lives in one VocabularyConfig, which round-trips through
an INI-style text file so operators can re-map gestures without code.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import NamedTuple

SCHEMA_VERSION = 1

DEFAULT_DEBOUNCE_FRAMES = 15
DEFAULT_SNAPSHOT_PERIOD_S = 1.0


class GestureClass(IntEnum):
    """The ten recognizable hand gestures; values are classifier output indices."""

    DIGIT_0 = 0
    DIGIT_1 = 1
    DIGIT_2 = 2
    DIGIT_3 = 3
    DIGIT_4 = 4
    DIGIT_5 = 5
    LEFT = 6
    RIGHT = 7
    PIC = 8
    OK = 9

    @property
    def spelling(self) -> str:
        return self.name.lower()

    @classmethod
    def from_spelling(cls, text: str) -> "GestureClass":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown gesture spelling: {text!r}") from None


class GesturePair(NamedTuple):
    """Simultaneous (left-half-of-image, right-half-of-image) gesture classification."""

    left: GestureClass
    right: GestureClass

    @property
    def spelling(self) -> str:
        return f"{self.left.spelling}+{self.right.spelling}"

    @classmethod
    def from_spelling(cls, text: str) -> "GesturePair":
        parts = text.split("+")
        if len(parts) != 2:
            raise ValueError(f"gesture pair must be 'left+right', got {text!r}")
        return cls(GestureClass.from_spelling(parts[0]), GestureClass.from_spelling(parts[1]))


class TokenKind(Enum):
    STOP = "stop"
    CONTD = "contd"
    GO = "go"
    HOVER = "hover"
    FOLLOW = "follow"
    MOVE_LEFT = "move_left"
    MOVE_RIGHT = "move_right"
    MOVE_UP = "move_up"
    MOVE_DOWN = "move_down"
    EXECUTE = "execute"
    UPDATE = "update"
    SNAPSHOT = "snapshot"
    DIGIT = "digit"
    INCREASE = "increase"
    DECREASE = "decrease"


# Token kinds that start / end an instruction; everything else is body.
START_SENTINELS = (TokenKind.STOP, TokenKind.CONTD)
END_SENTINEL = TokenKind.GO

TASK_TOKEN_KINDS = (
    TokenKind.HOVER,
    TokenKind.FOLLOW,
    TokenKind.MOVE_LEFT,
    TokenKind.MOVE_RIGHT,
    TokenKind.MOVE_UP,
    TokenKind.MOVE_DOWN,
)


@dataclass(frozen=True)
class LanguageToken:
    """A language token; ``digit`` is set only for DIGIT tokens."""

    kind: TokenKind
    digit: int | None = None

    def __post_init__(self) -> None:
        if self.kind is TokenKind.DIGIT:
            if self.digit is None or not 0 <= self.digit <= 5:
                raise ValueError(f"digit token needs digit in 0..5, got {self.digit}")
        elif self.digit is not None:
            raise ValueError(f"{self.kind.value} token carries no digit")

    @property
    def spelling(self) -> str:
        if self.kind is TokenKind.DIGIT:
            return f"digit_{self.digit}"
        return self.kind.value

    @classmethod
    def from_spelling(cls, text: str) -> "LanguageToken":
        t = text.strip().lower()
        if t.startswith("digit_"):
            try:
                return cls(TokenKind.DIGIT, int(t.removeprefix("digit_")))
            except ValueError:
                raise ValueError(f"bad digit token spelling: {text!r}") from None
        try:
            return cls(TokenKind(t))
        except ValueError:
            raise ValueError(f"unknown token spelling: {text!r}") from None

    def __str__(self) -> str:
        return self.spelling


# Ergonomic token constants for call sites and tests.
STOP = LanguageToken(TokenKind.STOP)
CONTD = LanguageToken(TokenKind.CONTD)
GO = LanguageToken(TokenKind.GO)
HOVER = LanguageToken(TokenKind.HOVER)
FOLLOW = LanguageToken(TokenKind.FOLLOW)
MOVE_LEFT = LanguageToken(TokenKind.MOVE_LEFT)
MOVE_RIGHT = LanguageToken(TokenKind.MOVE_RIGHT)
MOVE_UP = LanguageToken(TokenKind.MOVE_UP)
MOVE_DOWN = LanguageToken(TokenKind.MOVE_DOWN)
EXECUTE = LanguageToken(TokenKind.EXECUTE)
UPDATE = LanguageToken(TokenKind.UPDATE)
SNAPSHOT = LanguageToken(TokenKind.SNAPSHOT)
INCREASE = LanguageToken(TokenKind.INCREASE)
DECREASE = LanguageToken(TokenKind.DECREASE)


def digit(d: int) -> LanguageToken:
    return LanguageToken(TokenKind.DIGIT, d)


@dataclass(frozen=True)
class ParameterSpec:
    """A numbered tunable: an ordered value list plus the current index."""

    name: str
    values: tuple[float, ...]
    index: int = 0


@dataclass
class VocabularyConfig:
    """Everything the pipeline needs to know about the instruction language."""

    pair_to_token: dict[GesturePair, LanguageToken]
    programs: dict[int, str]
    parameters: dict[int, ParameterSpec]
    debounce_frames: int = DEFAULT_DEBOUNCE_FRAMES
    snapshot_period_s: float = DEFAULT_SNAPSHOT_PERIOD_S

    def token_for(self, pair: GesturePair) -> LanguageToken | None:
        return self.pair_to_token.get(pair)

    def pairs_for(self, token: LanguageToken) -> list[GesturePair]:
        return [p for p, t in self.pair_to_token.items() if t == token]

    def copy(self) -> "VocabularyConfig":
        return replace(
            self,
            pair_to_token=dict(self.pair_to_token),
            programs=dict(self.programs),
            parameters=dict(self.parameters),
        )


def _g(name: str) -> GestureClass:
    return GestureClass[name]


def default_vocabulary() -> VocabularyConfig:
    """The canonical pair-to-token table, numbered programs, and parameters."""
    pairs: dict[GesturePair, LanguageToken] = {
        GesturePair(_g("DIGIT_0"), _g("DIGIT_0")): STOP,
        GesturePair(_g("OK"), _g("OK")): CONTD,
        GesturePair(_g("DIGIT_5"), _g("DIGIT_5")): GO,
        GesturePair(_g("DIGIT_5"), _g("DIGIT_0")): HOVER,
        GesturePair(_g("DIGIT_5"), _g("DIGIT_1")): FOLLOW,
        GesturePair(_g("LEFT"), _g("LEFT")): MOVE_LEFT,
        GesturePair(_g("RIGHT"), _g("RIGHT")): MOVE_RIGHT,
        GesturePair(_g("LEFT"), _g("RIGHT")): MOVE_UP,
        GesturePair(_g("RIGHT"), _g("LEFT")): MOVE_DOWN,
        GesturePair(_g("DIGIT_1"), _g("DIGIT_0")): EXECUTE,
        GesturePair(_g("DIGIT_2"), _g("DIGIT_2")): UPDATE,
        GesturePair(_g("PIC"), _g("PIC")): SNAPSHOT,
        GesturePair(_g("OK"), _g("LEFT")): DECREASE,
        GesturePair(_g("OK"), _g("RIGHT")): INCREASE,
    }
    for d in range(6):
        pairs[GesturePair(_g("OK"), GestureClass(d))] = digit(d)
    programs = {
        0: "survey-loop",
        1: "transect",
        2: "lawnmower",
        3: "perimeter",
        4: "station-keep",
        5: "ascent-profile",
    }
    parameters = {
        0: ParameterSpec("depth_m", (1.0, 2.0, 3.0, 5.0, 8.0), 2),
        1: ParameterSpec("speed_mps", (0.1, 0.2, 0.4, 0.6, 0.8), 1),
        2: ParameterSpec("altitude_m", (0.5, 1.0, 1.5, 2.0), 1),
        3: ParameterSpec("light_level", (0.0, 0.25, 0.5, 0.75, 1.0), 2),
        4: ParameterSpec("camera_exposure", (0.5, 1.0, 2.0, 4.0), 1),
        5: ParameterSpec("loop_radius_m", (1.0, 2.0, 4.0), 1),
    }
    return VocabularyConfig(pair_to_token=pairs, programs=programs, parameters=parameters)


def map_pair(cfg: VocabularyConfig, pair: GesturePair) -> LanguageToken | None:
    """Token for a gesture pair, or None; unmapped pairs are legal and ignored downstream."""
    return cfg.token_for(pair)


def _all_token_spellings() -> list[LanguageToken]:
    out = []
    for kind in TokenKind:
        if kind is TokenKind.DIGIT:
            out.extend(digit(d) for d in range(6))
        else:
            out.append(LanguageToken(kind))
    return out


def validate_config(cfg: VocabularyConfig) -> list[str]:
    """All invariant violations, each naming the offending key; [] means valid."""
    violations: list[str] = []

    covered_kinds = {t.kind for t in cfg.pair_to_token.values()}
    for kind in TokenKind:
        if kind not in covered_kinds:
            violations.append(f"missing-token: {kind.value}")

    for d in range(6):
        n = sum(1 for t in cfg.pair_to_token.values() if t == digit(d))
        if n == 0 and TokenKind.DIGIT in covered_kinds:
            violations.append(f"missing-token: digit_{d}")
        elif n > 1:
            violations.append(f"duplicate-token: digit_{d}")

    for pid in cfg.programs:
        if not 0 <= pid <= 5:
            violations.append(f"bad-program-id: {pid}")
    for pid, spec in cfg.parameters.items():
        if not 0 <= pid <= 5:
            violations.append(f"bad-parameter-id: {pid}")
        if not spec.values:
            violations.append(f"empty-parameter-values: {pid}")
        elif not 0 <= spec.index < len(spec.values):
            violations.append(f"parameter-index-out-of-range: {pid}")

    if cfg.debounce_frames < 1:
        violations.append(f"bad-debounce-frames: {cfg.debounce_frames}")
    if cfg.snapshot_period_s <= 0:
        violations.append(f"bad-snapshot-period: {cfg.snapshot_period_s}")

    return violations


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed at all."""


_KNOWN_SECTIONS = ("meta", "gestures", "tokens", "programs", "parameters", "decoder")
_DECODER_KEYS = ("debounce_frames", "snapshot_period_s")
_PARAM_SUFFIXES = (".name", ".values", ".index")


def config_to_text(cfg: VocabularyConfig) -> str:
    """Serialize to the editable INI-style config format."""
    cp = configparser.ConfigParser()
    cp["meta"] = {"schema_version": str(SCHEMA_VERSION)}
    cp["gestures"] = {g.spelling: str(int(g)) for g in GestureClass}
    cp["tokens"] = {p.spelling: t.spelling for p, t in sorted(cfg.pair_to_token.items())}
    cp["programs"] = {str(k): v for k, v in sorted(cfg.programs.items())}
    params: dict[str, str] = {}
    for pid, spec in sorted(cfg.parameters.items()):
        params[f"{pid}.name"] = spec.name
        params[f"{pid}.values"] = ", ".join(repr(v) for v in spec.values)
        params[f"{pid}.index"] = str(spec.index)
    cp["parameters"] = params
    cp["decoder"] = {
        "debounce_frames": str(cfg.debounce_frames),
        "snapshot_period_s": repr(cfg.snapshot_period_s),
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_from_text(text: str) -> tuple[VocabularyConfig, list[str]]:
    """Parse the config format; returns (config, violations).

    Violations cover unknown sections/keys and malformed values in
    addition to everything validate_config reports. The returned config
    is usable only when the violation list is empty.
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc

    violations: list[str] = []
    for section in cp.sections():
        if section not in _KNOWN_SECTIONS:
            violations.append(f"unknown-section: {section}")

    if cp.has_section("meta"):
        version = cp.get("meta", "schema_version", fallback=None)
        if version != str(SCHEMA_VERSION):
            violations.append(f"unsupported-schema-version: {version}")
        for key in cp.options("meta"):
            if key != "schema_version":
                violations.append(f"unknown-key: meta.{key}")
    else:
        violations.append("missing-section: meta")

    if cp.has_section("gestures"):
        for key, val in cp.items("gestures"):
            try:
                g = GestureClass.from_spelling(key)
                if int(val) != int(g):
                    violations.append(f"bad-gesture-id: {key}")
            except ValueError:
                violations.append(f"unknown-key: gestures.{key}")

    pair_to_token: dict[GesturePair, LanguageToken] = {}
    if cp.has_section("tokens"):
        for key, val in cp.items("tokens"):
            try:
                pair = GesturePair.from_spelling(key)
            except ValueError:
                violations.append(f"unknown-key: tokens.{key}")
                continue
            try:
                pair_to_token[pair] = LanguageToken.from_spelling(val)
            except ValueError:
                violations.append(f"bad-token: tokens.{key} = {val}")

    programs: dict[int, str] = {}
    if cp.has_section("programs"):
        for key, val in cp.items("programs"):
            try:
                programs[int(key)] = val
            except ValueError:
                violations.append(f"unknown-key: programs.{key}")

    parameters: dict[int, ParameterSpec] = {}
    if cp.has_section("parameters"):
        fields: dict[int, dict[str, str]] = {}
        for key, val in cp.items("parameters"):
            stem, dot, attr = key.partition(".")
            if not dot or f".{attr}" not in _PARAM_SUFFIXES or not stem.isdigit():
                violations.append(f"unknown-key: parameters.{key}")
                continue
            fields.setdefault(int(stem), {})[attr] = val
        for pid, attrs in sorted(fields.items()):
            try:
                values = tuple(float(v) for v in attrs.get("values", "").split(",") if v.strip())
                parameters[pid] = ParameterSpec(
                    name=attrs.get("name", f"param_{pid}"),
                    values=values,
                    index=int(attrs.get("index", "0")),
                )
            except ValueError:
                violations.append(f"bad-parameter: {pid}")

    debounce = DEFAULT_DEBOUNCE_FRAMES
    snapshot_period = DEFAULT_SNAPSHOT_PERIOD_S
    if cp.has_section("decoder"):
        for key, val in cp.items("decoder"):
            if key not in _DECODER_KEYS:
                violations.append(f"unknown-key: decoder.{key}")
                continue
            try:
                if key == "debounce_frames":
                    debounce = int(val)
                else:
                    snapshot_period = float(val)
            except ValueError:
                violations.append(f"bad-value: decoder.{key} = {val}")

    cfg = VocabularyConfig(
        pair_to_token=pair_to_token,
        programs=programs,
        parameters=parameters,
        debounce_frames=debounce,
        snapshot_period_s=snapshot_period,
    )
    violations.extend(validate_config(cfg))
    return cfg, violations


def load_config(path: str) -> VocabularyConfig:
    """Load and validate a config file; raises ConfigError listing any violations."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg, violations = config_from_text(fh.read())
    if violations:
        raise ConfigError("invalid config: " + "; ".join(violations))
    return cfg
