"""Figure and delimited-file rendering for CLI reports.

Every report writes a CSV (or JSONL) next to a PNG figure so results
are both machine-readable and eyeballable.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .vocabulary import GestureClass


def _ensure_dir(path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)


def write_history_csv(history, path: str) -> None:
    _ensure_dir(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_accuracy", "val_accuracy"])
        for h in history:
            writer.writerow(
                [h.epoch, f"{h.train_loss:.6f}", f"{h.train_accuracy:.6f}",
                 "" if h.val_accuracy is None else f"{h.val_accuracy:.6f}"]
            )


def training_curves_figure(history, path: str) -> None:
    _ensure_dir(path)
    epochs = [h.epoch for h in history]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(epochs, [h.train_loss for h in history], color="tab:red")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("training loss")
    ax1.grid(alpha=0.3)
    ax2.plot(epochs, [h.train_accuracy for h in history], label="train", color="tab:blue")
    if any(h.val_accuracy is not None for h in history):
        ax2.plot(
            epochs,
            [h.val_accuracy for h in history],
            label="validation",
            color="tab:green",
        )
        ax2.legend()
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("accuracy")
    ax2.set_ylim(0, 1.02)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_confusion_csv(confusion: np.ndarray, path: str) -> None:
    _ensure_dir(path)
    names = [g.spelling for g in GestureClass]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\pred"] + names)
        for i, row in enumerate(confusion):
            writer.writerow([names[i]] + [int(v) for v in row])


def confusion_figure(confusion: np.ndarray, path: str, accuracy: float | None = None) -> None:
    _ensure_dir(path)
    names = [g.spelling for g in GestureClass]
    norm = confusion / np.maximum(confusion.sum(axis=1, keepdims=True), 1)
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    im = ax.imshow(norm, cmap="Blues", vmin=0, vmax=1)
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    title = "test-set confusion"
    if accuracy is not None:
        title += f" (accuracy {accuracy:.3f})"
    ax.set_title(title)
    for i in range(len(names)):
        for j in range(len(names)):
            if confusion[i, j]:
                color = "white" if norm[i, j] > 0.5 else "black"
                ax.text(j, i, int(confusion[i, j]), ha="center", va="center",
                        color=color, fontsize=8)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def decode_timeline_figure(events, threshold: int, path: str, total_frames: int | None = None) -> None:
    """Debounce commits and instruction emissions along the frame axis."""
    from .decoder import InstructionEmitted, TokenCommitted

    _ensure_dir(path)
    commits = [(e.frame_index, e.token.spelling) for e in events if isinstance(e, TokenCommitted)]
    emits = [(e.frame_index, e.instruction) for e in events if isinstance(e, InstructionEmitted)]
    fig, ax = plt.subplots(figsize=(9, 2.8))
    for frame, name in commits:
        ax.axvline(frame, color="tab:blue", alpha=0.6)
        ax.text(frame, 0.72, name, rotation=90, fontsize=7, ha="right", va="bottom")
    for frame, ins in emits:
        ax.axvline(frame, color="tab:red", linewidth=2)
        ax.text(frame, 0.08, type(ins).__name__, rotation=90, fontsize=7, ha="left",
                va="bottom", color="tab:red")
    ax.set_ylim(0, 1)
    ax.set_yticks([])
    ax.set_xlabel("frame")
    ax.set_title(f"committed tokens (blue) and instructions (red); threshold {threshold}")
    if total_frames:
        ax.set_xlim(0, total_frames)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_metrics_csv(report, path: str) -> None:
    _ensure_dir(path)
    d = report.to_dict()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.keys()))
        writer.writerow(list(d.values()))


def metrics_figure(report, path: str) -> None:
    _ensure_dir(path)
    d = report.to_dict()
    fig, ax = plt.subplots(figsize=(5.6, 3.2))
    labels, values = [], []
    if d["instruction_accuracy_pct"] != "n/a":
        labels.append("instructions")
        values.append(d["instruction_accuracy_pct"])
    if d["gesture_accuracy_pct"] != "n/a":
        labels.append("gestures")
        values.append(d["gesture_accuracy_pct"])
    if not labels:
        labels, values = ["no ground truth"], [0.0]
    bars = ax.bar(labels, values, color=["tab:blue", "tab:orange"][: len(labels)])
    for bar, v in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, v + 1, f"{v:.1f}%", ha="center", fontsize=9)
    ax.set_ylim(0, 105)
    ax.set_ylabel("accuracy (%)")
    ax.set_title("decode accuracy vs ground truth")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_jsonl(rows: list[dict], path: str) -> None:
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
