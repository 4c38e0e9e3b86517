"""Deterministic CSV emission shared by the CLI and the sweep results.

Every file starts with '#'-prefixed comment lines carrying the fully
resolved configuration (including the master seed), then a header row, then
data rows. Floats are written with repr (shortest round-trip form), so a
file is byte-identical across reruns and worker counts.
"""

from __future__ import annotations

__all__ = ["format_cell", "write_csv"]


def format_cell(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, comments, columns, rows):
    lines = [f"# {key} = {format_cell(val)}" for key, val in comments.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
