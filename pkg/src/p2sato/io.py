"""Structured text output: json-lines, csv and aligned tables, each with a metadata header."""

from __future__ import annotations

import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Iterable, Sequence, TextIO

from . import __version__

FORMATS = ("json-lines", "csv", "table")


def render_value(v: Any) -> Any:
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return [render_value(x) for x in v]
    return v


def metadata(command: str, **params) -> dict:
    return {"tool": "p2sato", "version": __version__, "command": command, **params}


def write_rows(
    rows: Iterable[dict],
    columns: Sequence[str],
    fmt: str,
    meta: dict,
    stream: TextIO | None = None,
) -> None:
    stream = stream or sys.stdout
    rows = [{c: render_value(r.get(c)) for c in columns} for r in rows]
    if fmt == "json-lines":
        stream.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for r in rows:
            stream.write(json.dumps(r) + "\n")
        return
    stream.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([json.dumps(v) if isinstance(v, list) else v for v in r.values()])
        stream.write(buf.getvalue())
        return
    if fmt == "table":
        cells = [list(columns)] + [
            [json.dumps(v) if isinstance(v, list) else str(v) for v in r.values()] for r in rows
        ]
        widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
        for row in cells:
            stream.write("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n")
        return
    raise ValueError(f"unknown format {fmt!r}")


def read_json_lines(text: str) -> tuple[dict, list[dict]]:
    lines = [json.loads(line) for line in text.splitlines() if line.strip()]
    return lines[0]["meta"], lines[1:]
