"""CSV and manifest writers for experiment results.

All floating-point values are written with 17 significant digits so that a
value read back is bit-identical to the one computed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .engine import loss_factor
from .errors import OutputError


def fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepPoint:
    n_theta: int
    terminal_error: float
    records: list


def _open(out_dir, name):
    path = os.path.join(out_dir, name)
    try:
        return path, open(path, "w", newline="")
    except OSError as exc:
        raise OutputError(path, exc.strerror) from exc


def _write_rows(out_dir, name, header, rows) -> str:
    path, fh = _open(out_dir, name)
    try:
        with fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OutputError(path, exc.strerror) from exc
    return path


def _time_cell(rec, record_timing):
    return fmt(rec.update_time) if record_timing else "nan"


def write_trials(out_dir, records, record_timing=False) -> str:
    """One row per trial; wall-time is ``nan`` unless ``record_timing``."""
    header = ["j", "reference", "error_norm", "n_nonzero", "update_time_s"]
    rows = [[r.j, r.reference, fmt(r.error_norm), r.n_nonzero,
             _time_cell(r, record_timing)] for r in records]
    return _write_rows(out_dir, "trials.csv", header, rows)


def write_sweep_trials(out_dir, points, record_timing=False) -> str:
    header = ["n_theta", "j", "reference", "error_norm", "n_nonzero", "update_time_s"]
    rows = [[p.n_theta, r.j, r.reference, fmt(r.error_norm), r.n_nonzero,
             _time_cell(r, record_timing)] for p in points for r in p.records]
    return _write_rows(out_dir, "trials.csv", header, rows)


def write_feedforward(out_dir, records) -> str:
    f = records[-1].f
    return _write_rows(out_dir, "feedforward_final.csv", ["k", "f"],
                       [[k, fmt(v)] for k, v in enumerate(f)])


def write_support(out_dir, records) -> str:
    rows = [[r.j, r.reference, len(r.support), " ".join(map(str, r.support))]
            for r in records]
    return _write_rows(out_dir, "support.csv", ["j", "reference", "size", "columns"], rows)


def write_sweep(out_dir, points) -> str:
    return _write_rows(out_dir, "sweep.csv", ["n_theta", "terminal_error_norm"],
                       [[p.n_theta, fmt(p.terminal_error)] for p in points])


def summary_rows(label, n_params, records, switches):
    rows = []
    for s in switches:
        ratio, ok = loss_factor(records, s)
        rows.append([label, n_params, s, fmt(ratio), int(ok), fmt(records[-1].error_norm)])
    if not switches:
        rows.append([label, n_params, "", "nan", 0, fmt(records[-1].error_norm)])
    return rows


def write_summary(out_dir, rows) -> str:
    header = ["method", "n_params", "switch_trial", "loss_factor", "finite",
              "terminal_error_norm"]
    return _write_rows(out_dir, "summary.csv", header, rows)


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, files, document, seed) -> str:
    """``manifest.json`` with the resolved configuration and file checksums."""
    entries = {os.path.basename(p): sha256_of(p) for p in sorted(files)}
    body = {
        "seed": seed,
        "config": document,
        "files": entries,
        "versions": {"numpy": np.__version__},
    }
    path, fh = _open(out_dir, "manifest.json")
    try:
        with fh:
            json.dump(body, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(path, exc.strerror) from exc
    return path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")
