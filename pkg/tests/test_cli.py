"""CLI: subcommand behavior, artifact outputs, seeded reproducibility."""

import json
import os

import pytest

from handlang.cli import run
from handlang.streams import (
    dump_instruction_log,
    encode_script,
    load_stream,
    parse_instruction_log,
    save_stream,
)
from handlang.vocabulary import GO, HOVER, STOP, digit


@pytest.fixture
def hover_stream_path(tmp_path, cfg):
    records = encode_script(cfg, [STOP, HOVER, digit(5), GO], dwell=20, gap=5)
    path = tmp_path / "stream.jsonl"
    save_stream(records, str(path))
    return str(path)


class TestDecode:
    def test_decode_hover_script(self, tmp_path, hover_stream_path, capsys):
        out = tmp_path / "out"
        assert run(["decode", "--input", hover_stream_path, "--out", str(out)]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["instructions"] == [
            {"type": "task_switch", "task": "hover", "duration_s": 50.0}
        ]
        logged = parse_instruction_log((out / "instructions.jsonl").read_text())
        assert len(logged) == 1
        assert (out / "timeline.png").exists()

    def test_decode_matches_service_ingest(self, tmp_path, hover_stream_path, cfg):
        """Offline decode and live session share one code path."""
        from handlang.service import PipelineService

        out = tmp_path / "out"
        run(["decode", "--input", hover_stream_path, "--out", str(out)])
        offline = parse_instruction_log((out / "instructions.jsonl").read_text())

        service = PipelineService()
        sid, _ = service.create_session(config=cfg, classifier="none")
        service.ingest_tokens(sid, load_stream(hover_stream_path))
        live = service.emitted_instructions(sid)
        assert offline == live

    def test_missing_input_is_io_error(self, tmp_path):
        assert run(["decode", "--input", "/nope.jsonl", "--out", str(tmp_path)]) == 1


class TestPerturb:
    def test_zero_rates_identity(self, tmp_path, hover_stream_path):
        out = str(tmp_path / "p.jsonl")
        assert run(["perturb", "--input", hover_stream_path, "--out", out,
                    "--p", "0", "--dropout", "0"]) == 0
        assert load_stream(out) == load_stream(hover_stream_path)

    def test_seeded_runs_identical(self, tmp_path, hover_stream_path):
        a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
        for out in (a, b):
            run(["perturb", "--input", hover_stream_path, "--out", out,
                 "--p", "0.2", "--seed", "7"])
        assert open(a).read() == open(b).read()

    def test_p_one_replaces_every_mapped_frame(self, tmp_path, hover_stream_path, cfg):
        out = str(tmp_path / "p.jsonl")
        run(["perturb", "--input", hover_stream_path, "--out", out, "--p", "1", "--seed", "1"])
        originals = {r.frame_index: r for r in load_stream(hover_stream_path)}
        for rec in load_stream(out):
            orig = originals[rec.frame_index]
            if orig.pair is not None:
                assert rec.pair != orig.pair

    def test_bad_usage_exits_2(self):
        assert run(["perturb", "--input"]) == 2


class TestSynthVideoAndReplay:
    def test_synth_then_frame_replay_decodes_script(self, tmp_path, cfg, capsys):
        script = {"tokens": ["contd", "snapshot", "digit_2", "go"],
                  "dwell": 18, "gap": 4, "width": 256, "height": 192}
        script_path = tmp_path / "script.json"
        script_path.write_text(json.dumps(script))
        frames_dir = tmp_path / "frames"
        assert run(["synth-video", "--script", str(script_path), "--out", str(frames_dir)]) == 0
        capsys.readouterr()
        pngs = [f for f in os.listdir(frames_dir) if f.endswith(".png")]
        assert len(pngs) == 18 * 4 + 4 * 3

        expected_path = tmp_path / "expected.jsonl"
        expected_path.write_text(
            dump_instruction_log([(0, __import__("handlang.decoder", fromlist=["Snapshot"]).Snapshot(20.0))])
        )
        out = tmp_path / "replay"
        assert run([
            "replay", "--frames", str(frames_dir),
            "--expected", str(expected_path),
            "--expected-tokens", str(frames_dir / "stream.jsonl"),
            "--out", str(out),
        ]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["metrics"]["successfully_decoded"] == 1
        assert printed["metrics"]["instruction_accuracy_pct"] == 100.0
        assert (out / "metrics.csv").exists()
        assert (out / "metrics.png").exists()
        assert (out / "messages.jsonl").exists()

    def test_raw_rgb_frame_replay(self, tmp_path, cfg, capsys):
        from handlang.vision import HandPlacement, SceneSpec, render_synthetic_frame

        pair = cfg.pairs_for(STOP)[0]
        frames_dir = tmp_path / "raw"
        frames_dir.mkdir()
        for i in range(16):
            scene = SceneSpec(
                width=128, height=96,
                left=HandPlacement(pair.left, (32, 48), 16, 0.0),
                right=HandPlacement(pair.right, (96, 48), 16, 0.0),
                seed=500 + i,
            )
            frame, _ = render_synthetic_frame(scene)
            (frames_dir / f"frame_{i:05d}.rgb").write_bytes(frame.to_raw_bytes())
        out = tmp_path / "replay"
        assert run(["replay", "--frames", str(frames_dir), "--frame-size", "128x96",
                    "--out", str(out)]) == 0
        printed = json.loads(capsys.readouterr().out)
        messages = (out / "messages.jsonl").read_text()
        assert '"token_committed"' in messages

    def test_synth_video_deterministic_per_seed(self, tmp_path, capsys):
        script = {"tokens": ["stop"], "dwell": 3, "gap": 0, "width": 128, "height": 96}
        script_path = tmp_path / "script.json"
        script_path.write_text(json.dumps(script))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(["synth-video", "--script", str(script_path), "--out", str(out),
                        "--seed", "9"]) == 0
            capsys.readouterr()
            outs.append(out)
        for fname in sorted(os.listdir(outs[0])):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes(), fname

    def test_token_replay_with_metrics(self, tmp_path, hover_stream_path, cfg, capsys):
        from handlang.decoder import TaskSwitch

        expected_path = tmp_path / "expected.jsonl"
        expected_path.write_text(dump_instruction_log([(0, TaskSwitch("hover", 50.0))]))
        out = tmp_path / "replay"
        assert run([
            "replay", "--tokens", hover_stream_path,
            "--expected", str(expected_path),
            "--expected-tokens", hover_stream_path,
            "--out", str(out),
        ]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["metrics"]["instruction_accuracy_pct"] == 100.0
        assert printed["metrics"]["gesture_accuracy_pct"] == 100.0
        mission = (out / "mission.jsonl").read_text()
        assert '"instruction_applied"' in mission


class TestDatasetAndTraining:
    def test_gen_dataset_layout(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert run(["gen-dataset", "--out", str(out), "--train", "2", "--val", "1",
                    "--test", "1", "--seed", "3"]) == 0
        assert (out / "train" / "digit_0").is_dir()
        assert (out / "samples.png").exists()
        printed = json.loads(capsys.readouterr().out)
        assert printed["counts"] == {"train": 20, "validation": 10, "test": 10}

    def test_train_and_eval_round_trip(self, tmp_path, capsys):
        data = tmp_path / "data"
        run(["gen-dataset", "--out", str(data), "--train", "12", "--val", "0",
             "--test", "4", "--seed", "5"])
        capsys.readouterr()
        train_out = tmp_path / "model"
        assert run(["train", "--data", str(data), "--out", str(train_out),
                    "--epochs", "8", "--batch-size", "16", "--seed", "0"]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["final_train_accuracy"] > 0.9
        assert (train_out / "weights.bin").exists()
        assert (train_out / "curves.png").exists()
        assert (train_out / "history.csv").exists()

        eval_out = tmp_path / "eval"
        assert run(["eval", "--data", str(data), "--weights",
                    str(train_out / "weights.bin"), "--out", str(eval_out)]) == 0
        printed = json.loads(capsys.readouterr().out)
        assert printed["accuracy"] >= 0.5
        assert (eval_out / "confusion.csv").exists()
        assert (eval_out / "confusion.png").exists()


class TestCnnReplay:
    def test_frame_replay_with_trained_cnn(self, tmp_path, cfg, capsys):
        """Classifier substitutability on the frame path: cnn instead of contour."""
        from handlang.classifier import TrainConfig, build_model, make_glyph_dataset, save_weights, train
        from handlang.vision import HandPlacement, SceneSpec, render_synthetic_frame

        data = make_glyph_dataset(per_class_train=24, per_class_val=0, per_class_test=0, seed=2)
        model = build_model(seed=0)
        model, _ = train(model, data, TrainConfig(epochs=10, batch_size=16, seed=0))
        weights = tmp_path / "w.bin"
        save_weights(model, str(weights))

        pair = cfg.pairs_for(STOP)[0]
        frames_dir = tmp_path / "frames"
        frames_dir.mkdir()
        for i in range(16):
            scene = SceneSpec(
                width=256, height=192,
                left=HandPlacement(pair.left, (64, 96), 38, 0.0),
                right=HandPlacement(pair.right, (192, 96), 38, 0.0),
                seed=700 + i,
            )
            frame, _ = render_synthetic_frame(scene)
            frame.save_png(str(frames_dir / f"frame_{i:05d}.png"))
        out = tmp_path / "replay"
        assert run(["replay", "--frames", str(frames_dir), "--classifier", "cnn",
                    "--weights", str(weights), "--out", str(out)]) == 0
        capsys.readouterr()
        messages = (out / "messages.jsonl").read_text()
        assert '"token_committed"' in messages
        assert '"stop"' in messages


class TestServeSmoke:
    def test_serve_binds_and_answers_hello(self):
        import json as js
        import socket
        import threading

        from handlang.service import PipelineServer

        server = PipelineServer(port=0)
        port = server.server_address[1]
        t = threading.Thread(target=server.serve_forever, daemon=True)
        t.start()
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=5) as sock:
                fh = sock.makefile("rwb")
                fh.write(js.dumps({"type": "hello"}).encode() + b"\n")
                fh.flush()
                assert js.loads(fh.readline())["type"] == "hello"
        finally:
            server.shutdown()
            server.server_close()
