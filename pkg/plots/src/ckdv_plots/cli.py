"""Command line: plots <kind> --in <run-dir> --out <file.png|svg>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .figures import KINDS, FigureRequest, render
from .io import ContractError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from a simulation run directory",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="run_dir", required=True,
                        help="run directory with the CSV/JSON outputs")
    parser.add_argument("--out", required=True, help="image path (.png or .svg)")
    parser.add_argument("--linear", action="store_true",
                        help="linear instead of log value axis")
    parser.add_argument("--stride", type=int, default=1,
                        help="plot every n-th sample/snapshot")
    parser.add_argument("--print-max-drift", action="store_true",
                        help="for invariant-drift: print the maximum plotted "
                             "drift to stdout")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    request = FigureRequest(
        kind=args.kind,
        run_dir=Path(args.run_dir),
        out_path=Path(args.out),
        log_axes=not args.linear,
        stride=args.stride,
    )
    try:
        result = render(request)
    except (ContractError, OSError) as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 1
    if args.kind == "invariant-drift" and args.print_max_drift:
        print(f"{result:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
