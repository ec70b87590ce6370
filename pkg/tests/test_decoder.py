"""Decoder: debounce rule, FSM grammar, stream decoding, oracle equivalence."""

import pytest
from hypothesis import given, settings, strategies as st

from handlang.decoder import (
    IDLE,
    DebounceFilter,
    DecoderState,
    ExecuteProgram,
    FsmName,
    FsmState,
    InstructionEmitted,
    ParamUpdate,
    Snapshot,
    StreamOrderError,
    TaskSwitch,
    TokenCommitted,
    TokenObservation,
    debounce_step,
    decode_stream,
    fsm_step,
    instruction_from_dict,
    instruction_to_dict,
)
from handlang.streams import encode_script, observations
from handlang.vocabulary import (
    CONTD,
    DECREASE,
    EXECUTE,
    GO,
    HOVER,
    SNAPSHOT,
    STOP,
    UPDATE,
    LanguageToken,
    TokenKind,
    default_vocabulary,
    digit,
)

from reference_decoder import reference_decode

ALL_TOKENS = [LanguageToken(k) for k in TokenKind if k is not TokenKind.DIGIT] + [
    digit(d) for d in range(6)
]


def run_debounce(tokens, threshold=15):
    """Feed a token-per-frame list; returns committed [(frame, token)]."""
    filt = DebounceFilter(threshold=threshold)
    commits = []
    for i, tok in enumerate(tokens):
        filt, committed = debounce_step(filt, TokenObservation(i, tok))
        if committed is not None:
            commits.append((i, committed))
    return commits


class TestDebounce:
    def test_15_consecutive_frames_commit_on_the_15th(self):
        commits = run_debounce([STOP] * 15)
        assert commits == [(14, STOP)]

    def test_14_frames_then_different_token_no_commit(self):
        assert run_debounce([STOP] * 14 + [GO]) == []

    def test_single_interruption_resets_the_run(self):
        tokens = [STOP] * 10 + [GO] + [STOP] * 14
        assert run_debounce(tokens) == []
        tokens = [STOP] * 10 + [GO] + [STOP] * 15
        assert run_debounce(tokens) == [(25, STOP)]

    def test_absent_frame_resets_run_to_zero(self):
        tokens = [STOP] * 14 + [None] + [STOP] * 14
        assert run_debounce(tokens) == []

    def test_45_frame_hold_commits_exactly_once(self):
        assert run_debounce([STOP] * 45) == [(14, STOP)]

    def test_rearms_after_gap_then_same_token_commits_again(self):
        tokens = [STOP] * 20 + [None] * 3 + [STOP] * 15
        commits = run_debounce(tokens)
        assert commits == [(14, STOP), (37, STOP)]

    def test_rearms_on_different_token(self):
        tokens = [STOP] * 15 + [GO] * 15 + [STOP] * 15
        assert [t for _, t in run_debounce(tokens)] == [STOP, GO, STOP]

    def test_run_length_never_exceeds_threshold(self):
        filt = DebounceFilter(threshold=15)
        for i in range(60):
            filt, _ = debounce_step(filt, TokenObservation(i, STOP))
            assert filt.run_length <= filt.threshold

    def test_threshold_one_commits_first_frame_of_new_token(self):
        commits = run_debounce([STOP, STOP, GO], threshold=1)
        assert commits == [(0, STOP), (2, GO)]

    def test_non_monotonic_frame_index_raises(self):
        filt = DebounceFilter(threshold=15)
        filt, _ = debounce_step(filt, TokenObservation(5, STOP))
        with pytest.raises(StreamOrderError):
            debounce_step(filt, TokenObservation(5, STOP))
        with pytest.raises(StreamOrderError):
            debounce_step(filt, TokenObservation(3, STOP))


class TestFsm:
    def run_tokens(self, tokens):
        state = IDLE
        emitted = []
        for tok in tokens:
            state, ins = fsm_step(state, tok)
            if ins is not None:
                emitted.append(ins)
        return state, emitted

    def test_hover_50s_script(self):
        state, emitted = self.run_tokens([STOP, HOVER, digit(5), GO])
        assert emitted == [TaskSwitch("hover", 50.0)]
        assert state == IDLE

    def test_param_update_script(self):
        _, emitted = self.run_tokens([CONTD, UPDATE, digit(3), DECREASE, GO])
        assert emitted == [ParamUpdate(3, "decrease")]

    def test_snapshot_20s_script(self):
        _, emitted = self.run_tokens([CONTD, SNAPSHOT, digit(2), GO])
        assert emitted == [Snapshot(20.0)]

    def test_execute_program_1_script(self):
        _, emitted = self.run_tokens([STOP, EXECUTE, digit(1), GO])
        assert emitted == [ExecuteProgram(1)]

    def test_untimed_task(self):
        _, emitted = self.run_tokens([STOP, HOVER, GO])
        assert emitted == [TaskSwitch("hover", None)]

    def test_digit_zero_means_indefinite(self):
        _, emitted = self.run_tokens([STOP, HOVER, digit(0), GO])
        assert emitted == [TaskSwitch("hover", None)]

    def test_wrong_token_self_loops(self):
        state, ins = fsm_step(FsmState(FsmName.GOT_STOP), UPDATE)
        assert state == FsmState(FsmName.GOT_STOP)
        assert ins is None

    def test_sentinels_restart_from_any_state(self):
        state, _ = fsm_step(FsmState(FsmName.UPDATE_DIR, param_id=3), STOP)
        assert state == FsmState(FsmName.GOT_STOP)
        state, _ = fsm_step(FsmState(FsmName.TASK_PENDING, task="hover"), CONTD)
        assert state == FsmState(FsmName.GOT_CONTD)

    def test_totality_over_every_state_token_pair(self):
        states = [
            IDLE,
            FsmState(FsmName.GOT_STOP),
            FsmState(FsmName.GOT_CONTD),
            FsmState(FsmName.TASK_PENDING, task="hover"),
            FsmState(FsmName.TASK_TIMED, task="hover", duration_s=20.0),
            FsmState(FsmName.EXEC_PENDING),
            FsmState(FsmName.EXEC_READY, program_id=2),
            FsmState(FsmName.UPDATE_PENDING),
            FsmState(FsmName.UPDATE_DIR, param_id=1),
            FsmState(FsmName.UPDATE_READY, param_id=1, direction="increase"),
            FsmState(FsmName.SNAP_PENDING),
            FsmState(FsmName.SNAP_TIMED, duration_s=30.0),
        ]
        for state in states:
            for tok in ALL_TOKENS:
                new_state, ins = fsm_step(state, tok)  # must not raise
                assert isinstance(new_state, FsmState)
                if ins is not None:
                    assert new_state == IDLE


class TestDecodeStream:
    def script_stream(self, cfg, tokens, dwell=20, gap=5):
        return observations(encode_script(cfg, tokens, dwell=dwell, gap=gap), cfg)

    def test_execute_program_1_with_noise_gaps(self, cfg):
        stream = self.script_stream(cfg, [STOP, EXECUTE, digit(1), GO])
        instructions, events = decode_stream(cfg, stream)
        assert instructions == [ExecuteProgram(1)]
        commits = [e.token for e in events if isinstance(e, TokenCommitted)]
        assert commits == [STOP, EXECUTE, digit(1), GO]

    def test_empty_stream(self, cfg):
        assert decode_stream(cfg, []) == ([], [])

    def test_snapshot_20s(self, cfg):
        stream = self.script_stream(cfg, [CONTD, SNAPSHOT, digit(2), GO])
        instructions, _ = decode_stream(cfg, stream)
        assert instructions == [Snapshot(20.0)]

    def test_determinism(self, cfg):
        stream = self.script_stream(cfg, [STOP, HOVER, digit(5), GO])
        a = decode_stream(cfg, stream)
        b = decode_stream(cfg, stream)
        assert a == b

    def test_matches_fold_of_steps(self, cfg):
        stream = self.script_stream(cfg, [CONTD, UPDATE, digit(3), DECREASE, GO])
        instructions, events = decode_stream(cfg, stream)
        state = DecoderState.fresh(cfg)
        manual_events = []
        for obs in stream:
            manual_events.extend(state.step(obs))
        assert manual_events == events
        assert [e.instruction for e in events if isinstance(e, InstructionEmitted)] == instructions

    def test_debounce_safety_shortening_any_run_drops_the_instruction(self, cfg):
        from handlang.streams import PairRecord

        tokens = [STOP, HOVER, digit(5), GO]
        target = TaskSwitch("hover", 50.0)
        baseline, _ = decode_stream(cfg, self.script_stream(cfg, tokens))
        assert baseline == [target]
        for cut in range(len(tokens)):
            records = []
            frame = 0
            for i, tok in enumerate(tokens):
                dwell = 14 if i == cut else 20  # one run below threshold
                pair = cfg.pairs_for(tok)[0]
                for _ in range(dwell):
                    records.append(PairRecord(frame, pair.left, pair.right, 1.0))
                    frame += 1
                records.append(PairRecord(frame, None, None, 0.0))
                frame += 1
            instructions, _ = decode_stream(cfg, observations(records, cfg))
            assert target not in instructions


class TestNoiseImmunity:
    def test_sub_threshold_windows_never_add_commits(self, cfg):
        """Brute force: overwrite every window of < threshold consecutive
        frames with an arbitrary token (one that does not extend an adjacent
        run). The noise itself can never commit, so the perturbed stream's
        committed tokens are an in-order subsequence of the baseline's and
        the instruction count cannot grow. (Breaking a run can still shorten
        an instruction, e.g. dropping its duration digit.)"""

        def commits_of(tokens):
            _, events = decode_stream(
                cfg, [TokenObservation(i, t) for i, t in enumerate(tokens)]
            )
            return [e.token for e in events if isinstance(e, TokenCommitted)]

        def is_subsequence(sub, full):
            it = iter(full)
            return all(any(x == y for y in it) for x in sub)

        base_tokens = []
        for tok in [STOP, HOVER, digit(5), GO]:
            base_tokens.extend([tok] * 18)
            base_tokens.append(None)
        baseline, _ = decode_stream(
            cfg, [TokenObservation(i, t) for i, t in enumerate(base_tokens)]
        )
        assert baseline == [TaskSwitch("hover", 50.0)]
        base_commits = commits_of(base_tokens)

        n = len(base_tokens)
        for width in (1, 7, 14):
            for start in range(0, n - width):
                for replacement in (UPDATE, digit(4)):
                    before = base_tokens[start - 1] if start > 0 else None
                    after = base_tokens[start + width] if start + width < n else None
                    if replacement in (before, after):
                        continue  # could extend an adjacent run; excluded by the rule
                    mutated = list(base_tokens)
                    mutated[start : start + width] = [replacement] * width
                    out, events = decode_stream(
                        cfg, [TokenObservation(i, t) for i, t in enumerate(mutated)]
                    )
                    commits = [
                        e.token for e in events if isinstance(e, TokenCommitted)
                    ]
                    assert replacement not in commits, (width, start)
                    assert is_subsequence(commits, base_commits), (width, start, commits)
                    assert len(out) <= len(baseline), (width, start, out)


def token_or_none():
    return st.one_of(st.none(), st.sampled_from(ALL_TOKENS))


@settings(max_examples=200, deadline=None)
@given(
    runs=st.lists(
        st.tuples(token_or_none(), st.integers(min_value=1, max_value=24)),
        min_size=0,
        max_size=24,
    )
)
def test_oracle_equivalence_on_random_run_streams(runs):
    cfg = default_vocabulary()
    tokens = []
    for tok, length in runs:
        tokens.extend([tok] * length)
    stream = [TokenObservation(i, t) for i, t in enumerate(tokens)]
    instructions, events = decode_stream(cfg, stream)
    ref_instructions, ref_commits = reference_decode(
        [(i, t) for i, t in enumerate(tokens)], cfg.debounce_frames
    )
    assert instructions == ref_instructions
    commits = [(e.frame_index, e.token) for e in events if isinstance(e, TokenCommitted)]
    assert commits == ref_commits


@settings(max_examples=100, deadline=None)
@given(
    tokens=st.lists(token_or_none(), min_size=0, max_size=300),
)
def test_oracle_equivalence_on_frame_noise_streams(tokens):
    cfg = default_vocabulary()
    stream = [TokenObservation(i, t) for i, t in enumerate(tokens)]
    instructions, _ = decode_stream(cfg, stream)
    ref_instructions, _ = reference_decode(list(enumerate(tokens)), cfg.debounce_frames)
    assert instructions == ref_instructions


def test_instruction_dict_round_trip():
    for ins in [
        TaskSwitch("hover", 50.0),
        TaskSwitch("move_up", None),
        ExecuteProgram(4),
        ParamUpdate(2, "increase"),
        Snapshot(20.0),
        Snapshot(None),
    ]:
        assert instruction_from_dict(instruction_to_dict(ins)) == ins
