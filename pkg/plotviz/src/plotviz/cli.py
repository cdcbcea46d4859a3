"""Command-line wrapper: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureKind, FigureSpec, render
from .tables import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz",
        description="Render figures from branchgrad CSV/JSON outputs.",
        epilog=(
            "input files per kind: event_display takes event.json; "
            "scan_summary takes scan_loss.csv scan_grads.csv gradstats.csv; "
            "gradstats_box takes gradstats.csv; optimization_curves takes "
            "one or more opt_<method>.csv"
        ),
    )
    parser.add_argument("kind", choices=[k.value for k in FigureKind])
    parser.add_argument("inputs", nargs="+", help="input file(s), order matters")
    parser.add_argument("-o", "--output", required=True, help="output .png or .svg")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(FigureKind(args.kind), tuple(args.inputs), args.output)
        render(spec)
    except (SchemaError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
