"""Console entry point: ergoaccel-render --csv ... --summary ... --out ...

Exit codes: 0 when the image is written, 2 when the inputs are missing,
malformed, or too thin to plot.
"""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergoaccel-render",
        description="Render an error-decay figure from ergoaccel output.")
    parser.add_argument("--csv", action="append", required=True,
                        help="error-series CSV (repeat for several series)")
    parser.add_argument("--summary", required=True,
                        help="JSON summary supplying the overlay rate")
    parser.add_argument("--out", required=True,
                        help="output image; extension selects the format")
    parser.add_argument("--title", help="figure title")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        result = render(PlotJob(csv_paths=tuple(args.csv),
                                summary_path=args.summary,
                                out_path=args.out, title=args.title))
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    points = sum(len(s.points) for s in result.series)
    print(f"wrote {result.out_path}: {len(result.series)} series, "
          f"{points} points, overlay slope {result.slope:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
