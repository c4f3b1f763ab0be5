"""Batch figure rendering from simulator output files.

Three subcommands, one per figure kind.  Exit codes: 0 success, 1 usage,
2 bad input (schema mismatch, unreadable file).
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sloviz", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    hm = sub.add_parser("heatmap", help="grid rasters with masks and boundaries")
    hm.add_argument("grid", help="sweep grid CSV")
    hm.add_argument("--boundaries", default=None, help="boundary polyline CSV")
    hm.add_argument("--cmap", default="viridis")
    hm.add_argument("--out", default="heatmaps.png")

    pr = sub.add_parser("profiles", help="phase/amplitude profiles with theory curves")
    pr.add_argument("profiles", help="measured profile CSV")
    pr.add_argument("predicted", help="predicted profile CSV")
    pr.add_argument("--out", default="profiles.png")

    pl = sub.add_parser("plane", help="complex-plane ensemble snapshot")
    pl.add_argument("snapshot", help="snapshot CSV")
    pl.add_argument("--cmap", default="YlOrRd")
    pl.add_argument("--out", default="plane.png")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "heatmap":
        inputs = (args.grid,) if args.boundaries is None else (args.grid, args.boundaries)
        spec = FigureSpec(kind="heatmap", inputs=inputs, out=args.out, cmap=args.cmap)
    elif args.command == "profiles":
        spec = FigureSpec(
            kind="profiles", inputs=(args.profiles, args.predicted), out=args.out
        )
    else:
        spec = FigureSpec(
            kind="complex_plane", inputs=(args.snapshot,), out=args.out, cmap=args.cmap
        )
    try:
        out = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
