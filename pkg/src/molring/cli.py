"""Command-line interface: run and validate scenario configs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import MolringError
from .scenarios import SCENARIOS, parse_config, run_scenario


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="molring",
        description="Cooperative emission simulations for molecular emitter arrays.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario config and write results.")
    run.add_argument("config", type=Path, help="Path to a scenario JSON config.")
    run.add_argument("--out-dir", type=Path, default=Path("results"),
                     help="Output directory (created if missing).")
    run.add_argument("--seed", type=int, default=None,
                     help="Override the config seed.")
    run.add_argument("--threads", type=int, default=1,
                     help="Worker threads for sweep points/realizations.")

    val = sub.add_parser("validate", help="Validate a config without running it.")
    val.add_argument("config", type=Path)

    sub.add_parser("list-scenarios", help="List available scenario names.")
    sub.add_parser("version", help="Print the package version.")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "version":
            print(__version__)
        elif args.command == "list-scenarios":
            for name in SCENARIOS:
                print(name)
        elif args.command == "validate":
            cfg = parse_config(args.config)
            print(json.dumps(cfg, indent=2))
        elif args.command == "run":
            cfg = parse_config(args.config)
            if args.seed is not None:
                cfg["seed"] = args.seed
            result = run_scenario(cfg, args.out_dir, threads=args.threads)
            manifest = args.out_dir / "manifest.json"
            print(f"wrote {len(result.files)} files; manifest: {manifest}")
    except MolringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
