"""Command-line entry point.

::

    sbfilc run [CONFIG] --out DIR [--seed S] [--preset E1|E2|E3|E4]
               [--sweep n_theta=1..12] [--jobs K] [--record-timing]
    sbfilc show-preset E1

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical or
solver failure, 4 output could not be written, 1 anything else.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

import yaml

from .config import PRESET_ALIASES, PRESETS, build_config, load_document
from .engine import run_experiment
from .errors import ConfigError, OutputError, SBFError
from .lifted import closed_loop_operators
from .reporting import (
    SweepPoint,
    summary_rows,
    write_feedforward,
    write_manifest,
    write_summary,
    write_support,
    write_sweep,
    write_sweep_trials,
    write_trials,
)

log = logging.getLogger("sbfilc")

_SWEEP_RE = re.compile(r"^n_theta=(\d+)\.\.(\d+)$")


def parse_sweep(text):
    """``"n_theta=1..12"`` -> ``range(1, 13)``."""
    m = _SWEEP_RE.match(text.strip())
    if not m:
        raise ConfigError(f"expected n_theta=A..B, got {text!r}", "sweep")
    lo, hi = int(m.group(1)), int(m.group(2))
    if not 1 <= lo <= hi:
        raise ConfigError(f"need 1 <= A <= B, got {lo}..{hi}", "sweep")
    return range(lo, hi + 1)


def _n_params(cfg, records):
    return records[0].theta.size if cfg.method != "sbf" else cfg.n_sparse


def _sweep_point(args):
    cfg, n = args
    cfg = dataclasses.replace(cfg, n_sparse=n)
    records = run_experiment(cfg)
    return SweepPoint(n, records[-1].error_norm, records)


def run_command(ns) -> int:
    overrides = {}
    if ns.seed is not None:
        overrides["seed"] = ns.seed
    doc = load_document(ns.config, ns.preset, overrides)
    cfg = build_config(doc)
    try:
        os.makedirs(ns.out, exist_ok=True)
    except OSError as exc:
        raise OutputError(ns.out, exc.strerror) from exc

    files = []
    if ns.sweep:
        if cfg.method != "sbf":
            raise ConfigError("only method sbf has a cardinality to sweep", "sweep")
        values = parse_sweep(ns.sweep)
        width = cfg.n_basis if cfg.basis == "fir" else {"physical": 3}.get(cfg.basis, cfg.N)
        if values[-1] > width:
            raise ConfigError(f"n_theta up to {values[-1]} exceeds the basis width {width}",
                              "sweep")
        jobs = [(cfg, n) for n in values]
        if ns.jobs > 1:
            with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
                points = list(pool.map(_sweep_point, jobs))
        else:
            points = [_sweep_point(j) for j in jobs]
        for p in points:
            log.info("n_theta=%d terminal |e|=%.6g", p.n_theta, p.terminal_error)
        files.append(write_sweep(ns.out, points))
        files.append(write_sweep_trials(ns.out, points, ns.record_timing))
        rows = []
        for p in points:
            rows += summary_rows(f"sbf[n_theta={p.n_theta}]", p.n_theta, p.records,
                                 cfg.switch_trials)
        files.append(write_summary(ns.out, rows))
    else:
        records = run_experiment(cfg, closed_loop_operators(cfg.plant, cfg.controller, cfg.N))
        log.info("terminal |e|=%.6g after %d trials", records[-1].error_norm, len(records))
        files.append(write_trials(ns.out, records, ns.record_timing))
        files.append(write_feedforward(ns.out, records))
        if cfg.method == "sbf":
            files.append(write_support(ns.out, records))
        files.append(write_summary(
            ns.out, summary_rows(cfg.method, _n_params(cfg, records), records,
                                 cfg.switch_trials)))
    write_manifest(ns.out, files, doc, cfg.seed)
    return 0


def show_preset(ns) -> int:
    doc = load_document(None, ns.name)
    sys.stdout.write(yaml.safe_dump(doc, sort_keys=False))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="sbfilc", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment or a cardinality sweep")
    run.add_argument("config", nargs="?", help="YAML config (merged over the preset)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--preset", choices=sorted(PRESETS + tuple(PRESET_ALIASES)))
    run.add_argument("--sweep", default=None, metavar="n_theta=A..B")
    run.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    run.add_argument("--record-timing", action="store_true",
                     help="write update wall-times (makes trials.csv run-dependent)")
    run.set_defaults(func=run_command)

    show = sub.add_parser("show-preset", help="print a preset merged over the defaults")
    show.add_argument("name", choices=sorted(PRESETS + tuple(PRESET_ALIASES)))
    show.set_defaults(func=show_preset)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if ns.command == "run" and ns.config is None and ns.preset is None:
        print("sbfilc: error: give a config file, --preset, or both", file=sys.stderr)
        return ConfigError.exit_code
    try:
        return ns.func(ns)
    except SBFError as exc:
        print(f"sbfilc: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
