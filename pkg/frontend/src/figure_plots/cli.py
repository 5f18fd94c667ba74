"""Command-line entry point: figure-plots --estimates ... --solutions ... --out PNG."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import CsvFormatError, PlotSpec, plot_histograms


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="figure-plots",
        description="Overlaid normalized histograms of eigenvalue errors "
                    "and per-gate TVDs from experiment CSVs.")
    p.add_argument("--estimates", nargs="*", default=[], type=Path,
                   help="estimates CSVs (one per shot count)")
    p.add_argument("--solutions", nargs="*", default=[], type=Path,
                   help="solution CSVs (one per shot count)")
    p.add_argument("--out", required=True, type=Path, help="output image path")
    p.add_argument("--bins", type=int, default=40, help="histogram bin count")
    p.add_argument("--linear-x", action="store_true",
                   help="linear instead of log x-axis")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            estimates=tuple(args.estimates),
            solutions=tuple(args.solutions),
            out=args.out,
            log_x=not args.linear_x,
            bins=args.bins,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out = plot_histograms(spec)
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
