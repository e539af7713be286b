"""Command-line figure renderer.

Exit codes: 0 success, 1 validation error (bad flags, missing files or
columns, mismatched time grids).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureSpec, render_figure


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="anthraplots",
        description="Render 2x2 figures from filter-run CSVs.",
    )
    parser.add_argument(
        "--figure", required=True, choices=("trajectories", "errors"),
        help="figure family to render",
    )
    parser.add_argument(
        "--inputs", required=True, nargs="+", type=Path, metavar="CSV",
        help="run CSVs, one per panel (up to 4)",
    )
    parser.add_argument(
        "--out", required=True, type=Path, help="output PNG path",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(args.figure, tuple(args.inputs), args.out)
        out = render_figure(spec)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
