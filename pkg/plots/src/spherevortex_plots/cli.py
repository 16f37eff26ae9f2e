"""Entry points: plot-sweep and plot-blob.

Both read one table written by the simulation CLI and write one image,
PNG or SVG by output extension.  Exit code 0 on success, 1 on any
figure error (missing table, unknown column, empty table, bad format).
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureError, blob_spec, plot_blob, plot_sweep, sweep_spec


def _parser(prog: str, description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=prog, description=description)
    parser.add_argument("table", help="input table (CSV with header row)")
    parser.add_argument("out", help="output image path (.png or .svg)")
    parser.add_argument("--title", default="", help="figure title")
    return parser


def _run(build, plot, argv) -> int:
    args = build.parse_args(argv)
    try:
        path = plot(args.table, args.out, args.title)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def main_sweep(argv=None) -> int:
    parser = _parser("plot-sweep",
                     "plot max real part against rotation rate, "
                     "one curve per ring radius")
    return _run(parser,
                lambda table, out, title: plot_sweep(sweep_spec(table, out, title)),
                argv)


def main_blob(argv=None) -> int:
    parser = _parser("plot-blob",
                     "plot blob inertia and support radius over time "
                     "on a log scale, marking recorded exit times")
    return _run(parser,
                lambda table, out, title: plot_blob(blob_spec(table, out, title)),
                argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] not in ("sweep", "blob"):
        print("usage: python -m spherevortex_plots.cli {sweep,blob} "
              "<table> <out> [--title T]", file=sys.stderr)
        return 2
    if argv[0] == "sweep":
        return main_sweep(argv[1:])
    return main_blob(argv[1:])


if __name__ == "__main__":
    sys.exit(main())
