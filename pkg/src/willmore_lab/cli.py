"""Command-line driver: ``willmore-lab <experiment> [--config F] [--out D] [--seed S] [--grid NxM]``.

Exit status is 0 iff every asserted threshold passes, 1 when a threshold
fails and 2 for an invalid configuration. Failures are printed as JSON.
"""
import argparse
import json
import sys
import time
from pathlib import Path

from .config import SUBCOMMANDS, load_config, parse_config
from .errors import ConfigError
from .experiments import run, to_json


def build_parser():
    parser = argparse.ArgumentParser(prog="willmore-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=f"run the {experiment} experiment")
        sp.add_argument("--config", type=Path, help="JSON experiment config (defaults are built in)")
        sp.add_argument("--out", type=Path, help="output directory (default results/<command>)")
        sp.add_argument("--seed", type=int, help="seed for random direction sets")
        sp.add_argument("--grid", help="grid size NxM, overriding the config")
        sp.add_argument("--quiet", action="store_true", help="only print failures")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    experiment = SUBCOMMANDS[args.command]
    overrides = {"experiment": experiment, "grid": args.grid, "seed": args.seed}
    try:
        if args.config is not None:
            cfg = load_config(args.config, **overrides)
        else:
            cfg = parse_config({}, **overrides)
    except (ConfigError, OSError) as exc:
        print(json.dumps({"status": "config-error", "experiment": experiment,
                          "field": getattr(exc, "field", None), "message": str(exc)}, sort_keys=True))
        return 2

    out = args.out or Path(cfg.out or Path("results") / args.command)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = run(cfg)
    elapsed = time.perf_counter() - start
    for name, text in sorted(result.files.items()):
        (out / name).write_text(text)
    (out / "config.json").write_text(to_json(cfg.to_dict()))
    (out / "checks.json").write_text(result.checks_json())

    if not args.quiet:
        for c in result.checks:
            print(c.describe())
        print(f"{experiment}: wrote {len(result.files) + 2} files to {out} in {elapsed:.1f} s")
    if result.passed:
        return 0
    print(json.dumps({"status": "threshold-failure", "experiment": experiment,
                      "failures": json.loads(to_json(result.failures()))}, sort_keys=True))
    return 1


if __name__ == "__main__":
    sys.exit(main())
