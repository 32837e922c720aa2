"""Report rendering: the ops table is checked field by field, the figures
only for being real non-empty PNGs (pixel content is matplotlib's business)."""

import csv

from textlayers.backend import MockBackend
from textlayers.engine import SelectionRange, TransformEngine
from textlayers.report import (
    _op_churn,
    layer_contribution_figure,
    op_timeline_figure,
    render_report,
    tone_wheel_figure,
    write_ops_csv,
)
from textlayers.store import DocumentRecord, OpLogEntry
from textlayers.tone import ToneVector

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def worked_record() -> DocumentRecord:
    record = DocumentRecord.new("Alice was beginning to get very tired. The cats ran.")
    engine = TransformEngine(MockBackend())
    outcome = engine.erase(record.stack, SelectionRange(10, 27))
    record.op_log.append(
        OpLogEntry(
            kind="erase",
            backend="mock",
            digest="d" * 64,
            changeset=outcome.changeset.to_wire(),
            layer=0,
            timestamp=10.0,
        )
    )
    inverse = [{"retain": 10}, {"insert": "beginning to get "}, {"retain": 25}]
    record.op_log.append(
        OpLogEntry(
            kind="undo",
            backend="none",
            digest="",
            changeset=inverse,
            layer=0,
            timestamp=11.5,
            undoes=0,
        )
    )
    record.current_tone = ToneVector(4, 7, 2)
    return record


def test_op_churn_counts():
    assert _op_churn([{"retain": 3}, {"delete": "ab"}, {"insert": "xyz"}]) == (3, 2, 3)
    assert _op_churn([{"retain": 7}]) == (7, 0, 0)
    assert _op_churn([]) == (0, 0, 0)


def test_ops_csv_fields(tmp_path):
    record = worked_record()
    path = write_ops_csv(record, tmp_path / "ops.csv")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
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
    assert rows[1] == ["0", "erase", "mock", "0", "10.000", "35", "17", "0", ""]
    assert rows[2] == ["1", "undo", "none", "0", "11.500", "35", "0", "17", "0"]


def test_ops_csv_with_empty_log(tmp_path):
    record = DocumentRecord.new("quiet")
    path = write_ops_csv(record, tmp_path / "ops.csv")
    assert path.read_text(encoding="utf-8").count("\n") == 1


def test_figures_are_nonempty_pngs(tmp_path):
    record = worked_record()
    for fn, name in (
        (tone_wheel_figure, "wheel.png"),
        (op_timeline_figure, "timeline.png"),
        (layer_contribution_figure, "layers.png"),
    ):
        out = fn(record, tmp_path / name)
        data = out.read_bytes()
        assert data.startswith(PNG_MAGIC)
        assert len(data) > 1000


def test_figures_handle_empty_documents(tmp_path):
    record = DocumentRecord.new("")
    for fn, name in (
        (tone_wheel_figure, "wheel.png"),
        (op_timeline_figure, "timeline.png"),
        (layer_contribution_figure, "layers.png"),
    ):
        assert fn(record, tmp_path / name).read_bytes().startswith(PNG_MAGIC)


def test_figures_handle_hidden_layers(tmp_path):
    record = worked_record()
    record.stack.add_layer("notes")
    record.stack.set_visibility(1, False)
    record.stack.set_active(0)
    out = layer_contribution_figure(record, tmp_path / "layers.png")
    assert out.read_bytes().startswith(PNG_MAGIC)


def test_render_report_writes_the_full_set(tmp_path):
    record = worked_record()
    paths = render_report(record, tmp_path / "out")
    assert [p.name for p in paths] == [
        "ops.csv",
        "tone_wheel.png",
        "op_timeline.png",
        "layer_contributions.png",
    ]
    for p in paths:
        assert p.is_file() and p.stat().st_size > 0
