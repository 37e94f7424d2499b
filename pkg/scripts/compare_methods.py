"""Compare the four learning methods on the reference-switching schedule.

For every preset (sbf, bf, no_fir, no) and seed, runs the default 10 + 10
trial schedule and reports the loss factor at the switch and the terminal
error norm.  Writes ``methods.csv`` (one row per method and seed) to the
output directory and prints a seed-averaged table.

Usage:  python scripts/compare_methods.py --out results/methods [--seeds 10]
"""

import argparse
import csv
import logging
import os

import numpy as np

from sbfilc import closed_loop_operators, load_config, loss_factor, run_experiment
from sbfilc.reporting import fmt

PRESETS = {"E1": "sbf", "E2": "bf", "E3": "no_fir", "E4": "no"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--noise-std", type=float, default=None,
                    help="absolute output-noise std (default: preset value)")
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR)
    os.makedirs(args.out, exist_ok=True)

    overrides = {} if args.noise_std is None else {"noise": {"std": args.noise_std}}
    base = load_config(preset="E4")
    ops = closed_loop_operators(base.plant, base.controller, base.N)

    rows, table = [], {}
    for preset, method in PRESETS.items():
        for seed in range(args.seeds):
            cfg = load_config(preset=preset, overrides={**overrides, "seed": seed})
            recs = run_experiment(cfg, ops)
            lf, _ = loss_factor(recs, cfg.switch_trials[0])
            rows.append([method, seed, fmt(lf), fmt(recs[-1].error_norm)])
            table.setdefault(method, []).append((lf, recs[-1].error_norm))

    with open(os.path.join(args.out, "methods.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "seed", "loss_factor", "terminal_error_norm"])
        w.writerows(rows)

    print(f"{'method':8s} {'loss factor':>14s} {'terminal |e|':>14s}")
    for method, vals in table.items():
        lf, te = np.mean(vals, axis=0)
        print(f"{method:8s} {lf:14.4g} {te:14.4e}")


if __name__ == "__main__":
    main()
