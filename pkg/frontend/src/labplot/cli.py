"""`labplot` command line: one figure per invocation."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_KINDS, FigureSpec, render_to_file


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="labplot", description=__doc__)
    parser.add_argument("experiment_dir", help="directory containing results.json")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--out", required=True, help="output file (.svg or .png)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code not in (0, None) else 0
    out = Path(args.out)
    fmt = out.suffix.lstrip(".").lower() or "svg"
    try:
        spec = FigureSpec(Path(args.experiment_dir), args.kind, fmt)
        path, _ = render_to_file(spec, out)
    except (FileNotFoundError, ValueError) as exc:
        print(exc, file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
