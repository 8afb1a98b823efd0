"""`figs --spec <path> [--data <dir>] [--out <dir>]`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import DataError, render
from .spec import SpecError, load_spec


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figs", description="Render simulation CSV outputs to figures.")
    parser.add_argument("--spec", required=True, help="figure spec file")
    parser.add_argument("--data", default=None,
                        help="root for relative csv paths "
                             "(default: the spec file's directory)")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    spec_path = Path(args.spec)
    data_root = Path(args.data) if args.data else spec_path.parent
    try:
        spec = load_spec(spec_path)
        result = render(spec, data_root=data_root, out_dir=args.out)
    except (SpecError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    total = sum(sum(p) for p in result.points_per_series)
    print(f"wrote {result.output} ({total} plotted points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
