"""Command-line interface: ``plotgen <figure-spec.json> [...]``.

Each argument is a figure-spec JSON file; one image is written per spec.
The output image path is printed to stdout on success.  A bad spec or CSV
stops the run with status 2 and a message on stderr naming the spec file
and the problem; specs already rendered keep their images.
"""

from __future__ import annotations

import argparse
import sys

from .errors import DataError, SchemaError, SpecError
from .figures import load_spec
from .render import render_to_file

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotgen",
        description="Render labeled figures from experiment result CSV files.",
    )
    parser.add_argument(
        "specs",
        nargs="+",
        metavar="figure-spec.json",
        help="figure-spec JSON file(s); one image is written per spec",
    )
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = _build_parser().parse_args(argv)
    for spec_path in args.specs:
        try:
            spec = load_spec(spec_path)
            out, series = render_to_file(spec)
        except (SpecError, SchemaError, DataError, OSError) as exc:
            print(f"error [{spec_path}]: {exc}", file=sys.stderr)
            return 2
        print(f"{out} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
