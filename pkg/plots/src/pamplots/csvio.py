"""Reader for the simulation CLI's CSV artifacts.

Files carry '#'-prefixed `key = value` comment lines (the resolved run
configuration), then a header row, then data rows. The schema is part of
the contract: a missing required column is an error, never a guess.
"""

from __future__ import annotations

import csv
import io

__all__ = ["SchemaError", "CsvTable", "read_table"]


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


class CsvTable:
    def __init__(self, meta, columns, rows):
        self.meta = meta          # parsed '#' header comments
        self.columns = columns
        self.rows = rows          # list of dicts, numeric where possible

    def require(self, *names):
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise SchemaError(
                f"missing required column(s) {missing}; found {self.columns}"
            )

    def meta_float(self, key):
        if key not in self.meta:
            raise SchemaError(f"missing required header comment '{key}'")
        try:
            return float(self.meta[key])
        except ValueError:
            raise SchemaError(
                f"header comment '{key}' is not numeric: {self.meta[key]!r}"
            ) from None

    def column(self, name):
        return [row[name] for row in self.rows]


def _coerce(text):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path):
    meta = {}
    body = []
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                stripped = line[1:].strip()
                if "=" in stripped:
                    key, val = (s.strip() for s in stripped.split("=", 1))
                    meta[key] = val
            elif line.strip():
                body.append(line)
    if not body:
        raise SchemaError(f"{path}: no header row found")
    reader = csv.reader(io.StringIO("\n".join(body)))
    columns = next(reader)
    rows = [
        {col: _coerce(cell) for col, cell in zip(columns, row)}
        for row in reader
    ]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return CsvTable(meta, columns, rows)


def read_tables(paths):
    """Read several files sharing one schema and concatenate their rows."""
    tables = [read_table(p) for p in paths]
    first = tables[0]
    for t in tables[1:]:
        if t.columns != first.columns:
            raise SchemaError(
                f"column mismatch across inputs: {t.columns} vs "
                f"{first.columns}"
            )
    rows = [r for t in tables for r in t.rows]
    return CsvTable(first.meta, first.columns, rows)
