"""Intermediate files passed between CLI subcommands.

Each file is comma-delimited text: a schema line ``# cashflowrate/<kind> v1``,
a header of field names, then one record per line. Floats are written with
``repr`` so they round-trip bit-exactly; missing values are empty cells.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Type, TypeVar

from .domain import CountrySummary, IndicatorRow, PanelObservation
from .errors import IoFailure, SchemaMismatch, ValidationError
from .indicators import StationaryCheck

SCHEMA_VERSION = 1
T = TypeVar("T")

KINDS: dict[str, type] = {
    "panel": PanelObservation,
    "indicators": IndicatorRow,
    "summaries": CountrySummary,
    "stationary": StationaryCheck,
}
FILENAMES = {
    "panel": "panel.csv",
    "indicators": "indicators.csv",
    "summaries": "summaries.csv",
    "stationary": "stationary.csv",
}


def _schema_line(kind: str) -> str:
    return f"# cashflowrate/{kind} v{SCHEMA_VERSION}"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parser(type_name: str):
    optional = type_name.startswith("Optional[")
    base = type_name[len("Optional["):-1] if optional else type_name

    def parse(text: str):
        if text == "" and optional:
            return None
        if base == "float":
            return float(text)
        if base == "int":
            return int(text)
        if base == "bool":
            if text not in ("true", "false"):
                raise ValueError(f"expected true/false, got {text!r}")
            return text == "true"
        return text

    return parse


def dumps(kind: str, records: Iterable) -> str:
    cls = KINDS[kind]
    names = [f.name for f in dataclasses.fields(cls)]
    buf = io.StringIO()
    buf.write(_schema_line(kind) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, n)) for n in names])
    return buf.getvalue()


def loads(kind: str, text: str) -> list:
    cls: Type[T] = KINDS[kind]
    lines = text.splitlines()
    if not lines or lines[0].strip() != _schema_line(kind):
        found = lines[0].strip() if lines else "<empty>"
        raise SchemaMismatch(f"expected '{_schema_line(kind)}', found '{found}'")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if header is None or set(header) != set(fields):
        raise SchemaMismatch(f"{kind} header does not match {sorted(fields)}")
    parsers = [_parser(str(fields[h].type)) for h in header]
    out = []
    for lineno, row in enumerate(reader, start=3):
        if len(row) != len(header):
            raise ValidationError(f"{kind} line {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            values = {h: p(cell) for h, p, cell in zip(header, parsers, row)}
        except ValueError as exc:
            raise ValidationError(f"{kind} line {lineno}: {exc}") from exc
        out.append(cls(**values))
    return out


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    tmp = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def atomic_write(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save(kind: str, directory: Path, records: Iterable) -> Path:
    path = Path(directory) / FILENAMES[kind]
    atomic_write(path, dumps(kind, records))
    return path


def load(kind: str, directory: Path) -> list:
    path = Path(directory) / FILENAMES[kind]
    if not path.exists():
        raise ValidationError(f"missing {'indicator' if kind == 'indicators' else kind} file: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return loads(kind, text)
