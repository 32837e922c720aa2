"""Offline report for a document: a few matplotlib figures rendered to files
next to a delimited dump of the operation log."""

from __future__ import annotations

import colorsys
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .changes import ChangeSet, Delete, Insert, timeline
from .store import DocumentRecord
from .tone import strongest_change_arrows, tone_to_disc, tone_to_rgb


def _op_churn(wire_ops: list) -> tuple[int, int, int]:
    cs = ChangeSet.from_wire(wire_ops)
    retained = deleted = inserted = 0
    for op in cs.ops:
        if isinstance(op, Delete):
            deleted += len(op.text)
        elif isinstance(op, Insert):
            inserted += len(op.text)
        else:
            retained += op.count
    return retained, deleted, inserted


def write_ops_csv(record: DocumentRecord, path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "index",
                "kind",
                "backend",
                "layer",
                "timestamp",
                "retained",
                "deleted",
                "inserted",
                "undoes",
            ]
        )
        for i, entry in enumerate(record.op_log):
            retained, deleted, inserted = _op_churn(entry.changeset)
            writer.writerow(
                [
                    i,
                    entry.kind,
                    entry.backend,
                    entry.layer,
                    f"{entry.timestamp:.3f}",
                    retained,
                    deleted,
                    inserted,
                    "" if entry.undoes is None else entry.undoes,
                ]
            )
    return path


def tone_wheel_figure(record: DocumentRecord, path: Path, samples: int = 181) -> Path:
    """Hue/saturation disc at the document's current value coordinate, with
    the current tone marked and its steepest per-axis directions drawn."""
    point, value = tone_to_disc(record.current_tone)
    grid = np.linspace(-1.0, 1.0, samples)
    xs, ys = np.meshgrid(grid, -grid)  # image rows run top to bottom
    radius = np.hypot(xs, ys)
    image = np.ones((samples, samples, 4))
    image[..., 3] = 0.0
    inside = radius <= 1.0
    # colorsys is scalar; the disc is small enough to fill pointwise.
    for i, j in zip(*np.nonzero(inside)):
        hue = (np.arctan2(ys[i, j], xs[i, j]) / (2 * np.pi)) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, radius[i, j], value)
        image[i, j] = (r, g, b, 1.0)

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(image, extent=(-1, 1, -1, 1))
    ax.plot([point.x], [point.y], marker="o", markersize=10, color="white",
            markeredgecolor="black")
    arrows = strongest_change_arrows(point, value)
    for label, (dx, dy) in zip(("formality", "sentiment", "complexity"), arrows):
        ax.annotate(
            label,
            xy=(point.x + 0.3 * dx, point.y + 0.3 * dy),
            xytext=(point.x, point.y),
            arrowprops={"arrowstyle": "->", "color": "black"},
            fontsize=8,
        )
    rgb = tone_to_rgb(record.current_tone)
    ax.set_title(f"current tone {record.current_tone.as_tuple()} rgb={rgb}")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def op_timeline_figure(record: DocumentRecord, path: Path) -> Path:
    """One row per logged operation; red bars for the deletion window of its
    animation, green for the insertion window, bar height scaled by churn."""
    fig, ax = plt.subplots(figsize=(8, max(2, 0.4 * len(record.op_log) + 1)))
    if not record.op_log:
        ax.text(0.5, 0.5, "no operations", ha="center", va="center")
        ax.axis("off")
    else:
        for i, entry in enumerate(record.op_log):
            tl = timeline(ChangeSet.from_wire(entry.changeset))
            for event in tl.events:
                color = "#c0392b" if event.kind == "delete" else "#27ae60"
                ax.barh(
                    i,
                    width=(event.end_ms - event.start_ms) / 1000.0,
                    left=event.start_ms / 1000.0,
                    height=0.6,
                    color=color,
                    alpha=0.8,
                )
        ax.set_yticks(range(len(record.op_log)))
        ax.set_yticklabels(
            [f"{i}: {e.kind}" for i, e in enumerate(record.op_log)], fontsize=8
        )
        ax.invert_yaxis()
        ax.set_xlabel("animation seconds (red delete, green insert)")
        ax.set_xlim(0, 1.0)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def layer_contribution_figure(record: DocumentRecord, path: Path) -> Path:
    """How many visible characters each layer contributes to the composition."""
    comp = record.stack.compose()
    counts: dict[int, int] = {layer.ordinal: 0 for layer in record.stack.layers}
    if len(comp):
        ordinals, freq = np.unique(
            np.frombuffer(comp.ids, dtype=np.int64) >> 32, return_counts=True
        )
        for ordinal, n in zip(ordinals.tolist(), freq.tolist()):
            counts[ordinal] = counts.get(ordinal, 0) + n
    names = []
    values = []
    for layer in record.stack.layers:
        suffix = "" if layer.visible else " (hidden)"
        names.append(f"{layer.ordinal}: {layer.name}{suffix}")
        values.append(counts.get(layer.ordinal, 0))
    fig, ax = plt.subplots(figsize=(6, max(2, 0.5 * len(names) + 1)))
    ax.barh(range(len(names)), values, color="#2980b9")
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("characters contributed")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_report(record: DocumentRecord, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        write_ops_csv(record, out_dir / "ops.csv"),
        tone_wheel_figure(record, out_dir / "tone_wheel.png"),
        op_timeline_figure(record, out_dir / "op_timeline.png"),
        layer_contribution_figure(record, out_dir / "layer_contributions.png"),
    ]
