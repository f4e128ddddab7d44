"""Standalone entry points: render figures from a gpcons artifact directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FigureError, FigureSpec, plot_accumulated_errors, \
    plot_trajectory3d

DEFAULT_MODES = ("none", "individual", "distributed")


def _parser(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding trajectory_<mode>.csv artifacts")
    parser.add_argument("--out", dest="out_dir", required=True,
                        help="directory for rendered images")
    parser.add_argument("--quiet", action="store_true")
    return parser


def accumulated_main(argv: list[str] | None = None) -> int:
    parser = _parser("Render accumulated-error comparison curves.")
    parser.add_argument("--modes", default=",".join(DEFAULT_MODES),
                        help="comma-separated run modes to overlay")
    args = parser.parse_args(argv)
    in_dir = Path(args.in_dir)
    modes = [m for m in args.modes.split(",") if m]
    spec_inputs = {m: in_dir / f"trajectory_{m}.csv" for m in modes}
    try:
        spec = FigureSpec(inputs=spec_inputs,
                          output=Path(args.out_dir) / "accumulated_errors.png",
                          kind="accumulated_error")
        out = plot_accumulated_errors(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"wrote {out}")
    return 0


def trajectory3d_main(argv: list[str] | None = None) -> int:
    parser = _parser("Render three-dimensional state trajectories.")
    parser.add_argument("--mode", default="distributed",
                        help="which run's trajectory CSV to draw")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            inputs={args.mode: Path(args.in_dir) / f"trajectory_{args.mode}.csv"},
            output=Path(args.out_dir) / f"trajectory3d_{args.mode}.png",
            kind="trajectory3d")
        out = plot_trajectory3d(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(accumulated_main())
