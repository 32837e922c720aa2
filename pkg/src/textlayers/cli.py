"""Command line: serve the HTTP API, or batch-process document files."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from .backend import BackendError
from .changes import timeline
from .config import ConfigError, Settings, build_backend
from .engine import EngineError, SelectionRange, TransformEngine, dispatch_tool
from .layers import LayerError
from .store import OpLogEntry, StoreError, dump_document, parse_document
from .tone import ToneVector

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BACKEND = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textlayers",
        description="Layered text editing: HTTP service and batch document tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP editor service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data-dir", type=Path, required=True)

    compose = sub.add_parser("compose", help="print a document's visible text")
    compose.add_argument("file", type=Path)

    apply_cmd = sub.add_parser(
        "apply", help="apply one transform to a document file, in place"
    )
    apply_cmd.add_argument("file", type=Path)
    apply_cmd.add_argument("--op", required=True)
    apply_cmd.add_argument("--start", type=int, required=True)
    apply_cmd.add_argument("--end", type=int, required=True)
    apply_cmd.add_argument("--params", default="{}", help="JSON object of op parameters")

    export = sub.add_parser("export", help="write a document as text or JSON")
    export.add_argument("file", type=Path)
    export.add_argument("--format", choices=("txt", "json"), default="txt")

    report = sub.add_parser(
        "report", help="render figures and a delimited ops table for a document"
    )
    report.add_argument("file", type=Path)
    report.add_argument("--out-dir", type=Path, required=True)

    return parser


def _load(path: Path):
    return parse_document(path.read_text(encoding="utf-8"))


def _write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, settings=Settings.from_env())
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _cmd_compose(args) -> int:
    record = _load(args.file)
    print(record.stack.compose().text)
    return EXIT_OK


def _cmd_apply(args) -> int:
    record = _load(args.file)
    params = json.loads(args.params)
    if not isinstance(params, dict):
        raise ValueError("--params must be a JSON object")
    settings = Settings.from_env()
    engine = TransformEngine(build_backend(settings), settings.resize_variants)
    sel = SelectionRange(args.start, args.end)
    outcome = dispatch_tool(engine, record.stack, args.op, sel, params)
    if args.op == "tone":
        record.current_tone = ToneVector.from_wire(params)
    now = time.time()
    record.op_log.append(
        OpLogEntry(
            kind=args.op,
            backend=outcome.provenance.get("backend", ""),
            digest=outcome.provenance.get("digest", ""),
            changeset=outcome.changeset.to_wire(),
            layer=record.stack.active_layer.ordinal,
            timestamp=now,
        )
    )
    record.modified = now
    _write(args.file, dump_document(record))
    print(
        json.dumps(
            {
                "changeset": outcome.changeset.to_wire(),
                "timeline": timeline(outcome.changeset).to_wire(),
                "new_composition": record.stack.compose().text,
                "new_selection": [
                    outcome.new_selection.start,
                    outcome.new_selection.end,
                ],
            },
            ensure_ascii=False,
        )
    )
    return EXIT_OK


def _cmd_export(args) -> int:
    record = _load(args.file)
    if args.format == "txt":
        print(record.stack.compose().text)
    else:
        sys.stdout.write(dump_document(record))
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import render_report

    record = _load(args.file)
    for path in render_report(record, args.out_dir):
        print(path)
    return EXIT_OK


_COMMANDS = {
    "serve": _cmd_serve,
    "compose": _cmd_compose,
    "apply": _cmd_apply,
    "export": _cmd_export,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (
        EngineError,
        LayerError,
        StoreError,
        ConfigError,
        ValueError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
