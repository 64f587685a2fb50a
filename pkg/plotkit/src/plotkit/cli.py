"""Batch figure rendering from the command line."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render benchmark result tables into figures.",
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--table", required=True, help="input CSV table")
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    parser.add_argument("--title")
    args = parser.parse_args(argv)
    try:
        job = PlotJob(table_path=args.table, kind=args.kind, out_path=args.out,
                      xlabel=args.xlabel, ylabel=args.ylabel, title=args.title)
        path = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
