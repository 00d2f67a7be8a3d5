"""Command line: render one figure from a scenario manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_KINDS, FigureJob, RenderError, render


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="molring-figures",
        description="Render figures from molring scenario result manifests.")
    p.add_argument("--manifest", type=Path, required=True,
                   help="Path to a scenario manifest.json.")
    p.add_argument("--kind", choices=FIGURE_KINDS, required=True,
                   help="Figure kind to render.")
    p.add_argument("--out", type=Path, required=True,
                   help="Output image path (png or svg).")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        out = render(FigureJob(args.manifest, args.kind, args.out))
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
