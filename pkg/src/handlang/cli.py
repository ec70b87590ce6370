"""Operator command line: datasets, training, decoding, noise studies, serving.

Subcommands:
    gen-dataset   render a labeled synthetic patch dataset
    train         train the CNN recognizer, write weights + curves
    eval          evaluate weights on a dataset split, write confusion matrix
    decode        decode a token stream file into an instruction log
    perturb       corrupt a token stream with the noise model
    synth-video   render a frame sequence for a scripted gesture program
    replay        run tokens/frames through a local pipeline with metrics
    serve         start the socket service

Every report path writes figures (PNG) alongside delimited output
(CSV/JSONL). All randomized commands take --seed and are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import reports
from .decoder import instruction_to_dict
from .noise import NoiseModel, perturb_stream
from .service import PipelineService, serve
from .streams import (
    PairRecord,
    dump_instruction_log,
    encode_script,
    load_stream,
    parse_instruction_log,
    save_stream,
)
from .vocabulary import LanguageToken, VocabularyConfig, default_vocabulary, load_config


def _load_cfg(args) -> VocabularyConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_vocabulary()


def _fail(message: str, detail=None) -> int:
    print(json.dumps({"error": message, "detail": detail}), file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_gen_dataset(args) -> int:
    from .classifier import make_glyph_dataset, save_dataset_dir

    data = make_glyph_dataset(
        per_class_train=args.train,
        per_class_val=args.val,
        per_class_test=args.test,
        seed=args.seed,
    )
    save_dataset_dir(data, args.out)
    _dataset_sample_figure(data, os.path.join(args.out, "samples.png"))
    print(json.dumps({"out": args.out, "counts": data.counts()}))
    return 0


def _dataset_sample_figure(data, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .vocabulary import GestureClass

    by_class: dict[int, list] = {}
    for patch, label in data.train:
        by_class.setdefault(label, []).append(patch)
    fig, axes = plt.subplots(10, 6, figsize=(6, 10))
    for row, gesture in enumerate(GestureClass):
        for col in range(6):
            ax = axes[row][col]
            ax.axis("off")
            samples = by_class.get(int(gesture), [])
            if col < len(samples):
                ax.imshow(samples[col])
            if col == 0:
                ax.set_title(gesture.spelling, fontsize=8, loc="left")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _cmd_train(args) -> int:
    from .classifier import (
        TrainConfig,
        build_model,
        evaluate,
        load_dataset_dir,
        make_glyph_dataset,
        save_weights,
        train,
    )

    if args.data:
        data = load_dataset_dir(args.data)
    else:
        data = make_glyph_dataset(seed=args.seed)
    cfg = TrainConfig(
        learning_rate=args.lr, batch_size=args.batch_size, epochs=args.epochs, seed=args.seed
    )
    model = build_model(seed=args.seed)
    model, history = train(model, data, cfg)
    os.makedirs(args.out, exist_ok=True)
    weights_path = os.path.join(args.out, "weights.bin")
    save_weights(model, weights_path)
    reports.write_history_csv(history, os.path.join(args.out, "history.csv"))
    reports.training_curves_figure(history, os.path.join(args.out, "curves.png"))
    summary = {
        "weights": weights_path,
        "parameters": model.param_count(),
        "final_train_accuracy": history[-1].train_accuracy,
        "final_train_loss": history[-1].train_loss,
    }
    if data.test:
        test_acc, _ = evaluate(model, data.test)
        summary["test_accuracy"] = test_acc
    print(json.dumps(summary))
    return 0


def _cmd_eval(args) -> int:
    from .classifier import build_model, evaluate, load_dataset_dir, load_weights

    data = load_dataset_dir(args.data)
    split = getattr(data, args.split)
    if not split:
        return _fail("empty-split", args.split)
    model = build_model(seed=0)
    load_weights(model, args.weights)
    accuracy, confusion = evaluate(model, split)
    os.makedirs(args.out, exist_ok=True)
    reports.write_confusion_csv(confusion, os.path.join(args.out, "confusion.csv"))
    reports.confusion_figure(confusion, os.path.join(args.out, "confusion.png"), accuracy)
    print(json.dumps({"split": args.split, "accuracy": accuracy, "count": len(split)}))
    return 0


def _decode_records(cfg: VocabularyConfig, records: list[PairRecord]):
    """Shared decode path: a token-only service session."""
    service = PipelineService()
    session_id, _ = service.create_session(config=cfg, classifier="none")
    service.ingest_tokens(session_id, records)
    return service, session_id


def _cmd_decode(args) -> int:
    cfg = _load_cfg(args)
    records = load_stream(args.input)
    service, session_id = _decode_records(cfg, records)
    emitted = service.emitted_instructions(session_id)
    os.makedirs(args.out, exist_ok=True)
    log_path = os.path.join(args.out, "instructions.jsonl")
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(dump_instruction_log(emitted))
    from .decoder import decode_stream
    from .streams import observations

    _, events = decode_stream(cfg, observations(records, cfg))
    reports.decode_timeline_figure(
        events,
        cfg.debounce_frames,
        os.path.join(args.out, "timeline.png"),
        total_frames=records[-1].frame_index + 1 if records else None,
    )
    print(json.dumps({
        "instructions": [instruction_to_dict(i) for _, i in emitted],
        "log": log_path,
    }))
    return 0


def _cmd_perturb(args) -> int:
    cfg = _load_cfg(args)
    records = load_stream(args.input)
    noise = NoiseModel(substitution_rate=args.p, dropout_rate=args.dropout, seed=args.seed)
    save_stream(perturb_stream(records, noise, cfg), args.out)
    print(json.dumps({"out": args.out, "frames": len(records)}))
    return 0


def _cmd_synth_video(args) -> int:
    from .vision import HandPlacement, SceneSpec, render_synthetic_frame

    cfg = _load_cfg(args)
    with open(args.script, "r", encoding="utf-8") as fh:
        script = json.load(fh)
    tokens = [LanguageToken.from_spelling(t) for t in script["tokens"]]
    dwell = int(script.get("dwell", 20))
    gap = int(script.get("gap", 5))
    width = int(script.get("width", 320))
    height = int(script.get("height", 240))
    noise_sigma = float(script.get("noise_sigma", 0.0))
    hand_scale = int(script.get("hand_scale", min(width, height) // 6))
    records = encode_script(cfg, tokens, dwell=dwell, gap=gap)

    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)
    boxes_rows = []
    for rec in records:
        if rec.pair is None:
            scene = SceneSpec(width=width, height=height, noise_sigma=noise_sigma,
                              seed=int(rng.integers(0, 2**31)))
        else:
            scene = SceneSpec(
                width=width,
                height=height,
                left=HandPlacement(rec.pair.left, (width // 4, height // 2), hand_scale, 0.0),
                right=HandPlacement(
                    rec.pair.right, (3 * width // 4, height // 2), hand_scale, 0.0
                ),
                noise_sigma=noise_sigma,
                seed=int(rng.integers(0, 2**31)),
            )
        frame, gt = render_synthetic_frame(scene)
        frame.save_png(os.path.join(args.out, f"frame_{rec.frame_index:05d}.png"))
        boxes_rows.append({"frame_index": rec.frame_index, "boxes": gt})
    save_stream(records, os.path.join(args.out, "stream.jsonl"))
    reports.write_jsonl(boxes_rows, os.path.join(args.out, "boxes.jsonl"))
    print(json.dumps({"out": args.out, "frames": len(records)}))
    return 0


def _cmd_replay(args) -> int:
    cfg = _load_cfg(args)
    service = PipelineService()
    if args.tokens:
        records = load_stream(args.tokens)
        session_id, _ = service.create_session(config=cfg, classifier="none")
        service.ingest_tokens(session_id, records)
    elif args.frames:
        from .vision import FrameRaster

        cnn_model = None
        if args.classifier == "cnn":
            from .classifier import build_model, load_weights

            if not args.weights:
                return _fail("missing-weights", "--classifier cnn needs --weights")
            cnn_model = build_model(seed=0)
            load_weights(cnn_model, args.weights)
        session_id, _ = service.create_session(
            config=cfg, classifier=args.classifier, cnn_model=cnn_model
        )
        names = sorted(
            f
            for f in os.listdir(args.frames)
            if f.startswith("frame_") and (f.endswith(".png") or f.endswith(".rgb"))
        )
        if not names:
            return _fail("no-frames", args.frames)
        for name in names:
            index = int(name[len("frame_") : name.index(".")])
            path = os.path.join(args.frames, name)
            if name.endswith(".png"):
                frame = FrameRaster.load_png(path)
            else:
                # raw interleaved RGB planes need explicit dimensions
                if not args.frame_size:
                    return _fail("missing-frame-size", "raw .rgb frames need --frame-size WxH")
                w, h = (int(v) for v in args.frame_size.lower().split("x"))
                with open(path, "rb") as fh:
                    frame = FrameRaster.from_raw_bytes(fh.read(), w, h)
            service.ingest_frame(session_id, index, frame)
    else:
        return _fail("missing-input", "need --tokens or --frames")

    expected = None
    if args.expected:
        with open(args.expected, "r", encoding="utf-8") as fh:
            expected = [ins for _, ins in parse_instruction_log(fh.read())]
    expected_tokens = None
    if args.expected_tokens:
        clean = load_stream(args.expected_tokens)
        expected_tokens = [(r.frame_index, r.to_observation(cfg).token) for r in clean]

    report = service.metrics_report(session_id, expected, expected_tokens)
    emitted = service.emitted_instructions(session_id)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "instructions.jsonl"), "w", encoding="utf-8") as fh:
        fh.write(dump_instruction_log(emitted))
    with open(os.path.join(args.out, "mission.jsonl"), "w", encoding="utf-8") as fh:
        fh.write(service.mission_log(session_id).to_jsonl() + "\n")
    reports.write_jsonl(service.message_log(session_id), os.path.join(args.out, "messages.jsonl"))
    reports.write_metrics_csv(report, os.path.join(args.out, "metrics.csv"))
    reports.metrics_figure(report, os.path.join(args.out, "metrics.png"))
    print(json.dumps({"metrics": report.to_dict(), "out": args.out}))
    return 0


def _cmd_serve(args) -> int:
    serve(args.host, args.port)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handlang",
        description="gesture-pair instruction pipeline tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="render a synthetic labeled patch dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--train", type=int, default=200, help="patches per class")
    p.add_argument("--val", type=int, default=40)
    p.add_argument("--test", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_gen_dataset)

    p = sub.add_parser("train", help="train the CNN recognizer")
    p.add_argument("--data", help="dataset directory (default: generate in memory)")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate weights, write confusion matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=("train", "validation", "test"), default="test")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("decode", help="decode a token stream file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_decode)

    p = sub.add_parser("perturb", help="corrupt a token stream")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--p", type=float, default=0.0, help="substitution rate")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_perturb)

    p = sub.add_parser("synth-video", help="render frames for a scripted gesture program")
    p.add_argument("--script", required=True, help="JSON: tokens, dwell, gap, width, height")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_synth_video)

    p = sub.add_parser("replay", help="replay tokens or frames through a local pipeline")
    p.add_argument("--tokens", help="token stream jsonl")
    p.add_argument("--frames", help="directory of frame_NNNNN.png files")
    p.add_argument("--expected", help="expected instruction log jsonl")
    p.add_argument("--expected-tokens", help="clean token stream jsonl for gesture accuracy")
    p.add_argument("--classifier", choices=("contour", "cnn"), default="contour")
    p.add_argument("--weights", help="weight file for --classifier cnn")
    p.add_argument("--frame-size", help="WxH for raw .rgb frames, e.g. 320x240")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("serve", help="start the socket service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7787)
    p.set_defaults(fn=_cmd_serve)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        return _fail("file-not-found", str(exc))
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc))


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
