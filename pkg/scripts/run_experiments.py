"""Run every experiment from configs/ and write results/<command>/.

    python3 scripts/run_experiments.py [--only sweep boundary] [--root results]

Prints one line per experiment and exits nonzero if any threshold failed.
"""
import argparse
import sys
from pathlib import Path

from willmore_lab import cli

ROOT = Path(__file__).resolve().parent.parent
COMMANDS = ("invariance", "sweep", "boundary", "stability", "identities")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", nargs="*", choices=COMMANDS, default=list(COMMANDS))
    ap.add_argument("--root", type=Path, default=ROOT / "results")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    codes = {}
    for cmd in args.only:
        argv = [cmd, "--config", str(ROOT / "configs" / f"{cmd}.json"), "--out", str(args.root / cmd), "--quiet"]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        codes[cmd] = cli.main(argv)
    for cmd, code in codes.items():
        print(f"{cmd:12s} exit {code}")
    return max(codes.values())


if __name__ == "__main__":
    sys.exit(main())
