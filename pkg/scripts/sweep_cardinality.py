"""Terminal error of sparse learning as a function of the cardinality.

Thin wrapper around ``sbfilc run --preset E1 --sweep n_theta=A..B`` that also
prints the curve and the relative improvement of each step.

Usage:  python scripts/sweep_cardinality.py --out results/sweep [--max 12] [--jobs 4]
"""

import argparse
import csv
import os
import sys

from sbfilc.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--max", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    code = cli(["run", "--preset", "E1", "--out", args.out, "--seed", str(args.seed),
                "--sweep", f"n_theta=1..{args.max}", "--jobs", str(args.jobs)])
    if code:
        sys.exit(code)
    with open(os.path.join(args.out, "sweep.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    prev = None
    print(f"{'n_theta':>7s} {'terminal |e|':>14s} {'gain':>8s}")
    for row in rows:
        e = float(row["terminal_error_norm"])
        gain = "" if prev is None else f"{(prev - e) / prev:8.1%}"
        print(f"{row['n_theta']:>7s} {e:14.4e} {gain}")
        prev = e


if __name__ == "__main__":
    main()
