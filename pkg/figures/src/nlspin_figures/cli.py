"""Command line entry: one subcommand per figure id.

    nlspin-figures fig1 --input portrait.csv --output fig1.png
    nlspin-figures fig5 --input scaling.csv --output fig5.png \
        --fit-table fitted_f.csv
"""

import argparse
import sys

from .common import MissingColumnError
from .render import RENDERERS, FigureSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nlspin-figures",
        description="Regenerate figures from experiment CSVs.",
    )
    sub = parser.add_subparsers(dest="figure_id", required=True)
    for figure_id in RENDERERS:
        p = sub.add_parser(figure_id)
        p.add_argument("--input", action="append", required=True,
                       help="input CSV (repeatable)")
        p.add_argument("--output", required=True, help="output image path")
        p.add_argument("--xrange", type=float, nargs=2, default=None)
        p.add_argument("--yrange", type=float, nargs=2, default=None)
        p.add_argument("--expect-version", default=None,
                       help="warn when input files carry another tool version")
        if figure_id == "fig5":
            p.add_argument("--fit-table", default=None,
                           help="also write the fitted-F table CSV")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    ranges = {}
    if args.xrange:
        ranges["x"] = tuple(args.xrange)
    if args.yrange:
        ranges["y"] = tuple(args.yrange)
    spec = FigureSpec(
        figure_id=args.figure_id,
        inputs=tuple(args.input),
        output=args.output,
        axis_ranges=ranges,
        fit_table=getattr(args, "fit_table", None),
        expected_version=args.expect_version,
    )
    try:
        render(spec)
    except MissingColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
