"""High-frequency content of the learned feedforward: sparse FIR vs full FIR.

Runs the sparse (E1) and full norm-optimal FIR (E3) presets under output
noise and compares the terminal error and the energy of the final
feedforward above a quarter of the Nyquist frequency.  Writes
``smoothness.csv`` and ``feedforward_<method>_seed<k>.csv`` for the first
seed, suitable for plotting.

Usage:  python scripts/smoothness.py --out results/smooth [--noise-std 3e-4] [--seeds 10]
"""

import argparse
import csv
import logging
import os

import numpy as np

from sbfilc import closed_loop_operators, load_config, run_experiment
from sbfilc.reporting import fmt


def hf_energy(f):
    F = np.fft.rfft(f)
    k = np.arange(F.size)
    return float(np.sum(np.abs(F[k > len(f) / 8]) ** 2))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--noise-std", type=float, default=3e-4)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR)
    os.makedirs(args.out, exist_ok=True)

    base = load_config(preset="E4")
    ops = closed_loop_operators(base.plant, base.controller, base.N)
    rows = []
    for seed in range(args.seeds):
        for preset, method in (("E1", "sbf"), ("E3", "no_fir")):
            cfg = load_config(preset=preset, overrides={
                "seed": seed, "noise": {"std": args.noise_std}})
            last = run_experiment(cfg, ops)[-1]
            rows.append([method, seed, fmt(last.error_norm), fmt(hf_energy(last.f))])
            if seed == 0:
                path = os.path.join(args.out, f"feedforward_{method}_seed0.csv")
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["k", "f"])
                    w.writerows([k, fmt(v)] for k, v in enumerate(last.f))
        print(f"seed {seed}: " + "  ".join(f"{r[0]} |e|={float(r[2]):.3e} "
                                           f"HF={float(r[3]):.3g}" for r in rows[-2:]))

    with open(os.path.join(args.out, "smoothness.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "seed", "terminal_error_norm", "hf_energy"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
