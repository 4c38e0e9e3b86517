"""Command line front end: render one figure kind from CSV artifacts."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .figures import FIGURE_KINDS, PlotSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pamlab-plot",
        description="Render figures from simulation CSV files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--kind", required=True, choices=sorted(FIGURE_KINDS),
                   help="figure kind")
    p.add_argument("--csv", required=True, action="append",
                   help="input CSV (repeatable; schemas must match)")
    p.add_argument("--out", required=True, help="output image path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        out = render(PlotSpec(tuple(args.csv), args.kind, args.out))
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
