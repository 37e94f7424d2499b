"""Experiment configuration files.

A configuration is a YAML mapping.  Loading merges, in order, the shipped
defaults, an optional preset, the user document and command-line overrides;
nested mappings are merged key by key, everything else is replaced.  Unknown
keys are rejected so that typos do not silently fall back to defaults.

Schema (all keys optional except where the defaults cannot help)::

    name: str
    plant:      {num: [...], den: [...], dt: float}   # ascending powers of z^-1
    controller: {num: [...], den: [...], dt: float}
    trial_length: int                                 # N
    trials: int
    method: sbf | bf | no_fir | no
    basis: {kind: fir | physical | identity | null, n_theta_total: int, preview: int}
    sparsity: int                                     # target nonzeros for sbf
    weights: {e: float | [N], f: float | [N], df: float | [N]}
    noise: {std: float | null, relative: float}       # relative to peak |r|
    profiles: {<id>: {displacement, max_velocity, max_acceleration,
                      max_jerk, max_snap}}
    schedule: [{profile: <id>, first: int, last: int}, ...]
    seed: int
    reset_on_switch: bool
    learner_gain: float
    allow_pseudo_inverse: bool
"""

from __future__ import annotations

import copy
from importlib import resources

import numpy as np
import yaml

from .engine import ExperimentConfig, Segment
from .errors import ConfigError, SBFError
from .lifted import DiscreteTransferFunction
from .norm_optimal import Weights
from .trajectory import MotionProfile, fourth_order_reference

PRESETS = ("E1", "E2", "E3", "E4")
PRESET_ALIASES = {"E1-sbf": "E1", "E2-bf": "E2", "E3-no_fir": "E3", "E4-no": "E4"}

_TOP_KEYS = {
    "name", "plant", "controller", "trial_length", "trials", "method", "basis",
    "sparsity", "weights", "noise", "profiles", "schedule", "seed",
    "reset_on_switch", "learner_gain", "allow_pseudo_inverse",
}
_SECTION_KEYS = {
    "plant": {"num", "den", "dt"},
    "controller": {"num", "den", "dt"},
    "basis": {"kind", "n_theta_total", "preview"},
    "weights": {"e", "f", "df"},
    "noise": {"std", "relative"},
}
_PROFILE_KEYS = {"displacement", "max_velocity", "max_acceleration", "max_jerk",
                 "max_snap"}


def _read_yaml(text, origin):
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{origin}: not valid YAML ({exc})") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    return doc


def _resource_text(name):
    return resources.files("sbfilc").joinpath("presets", name).read_text()


def default_document() -> dict:
    return _read_yaml(_resource_text("default.yaml"), "default.yaml")


def preset_name(name: str) -> str:
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from "
                          f"{', '.join(PRESETS)}", "preset")
    return key


def preset_document(name: str) -> dict:
    key = preset_name(name)
    return _read_yaml(_resource_text(f"{key}.yaml"), f"{key}.yaml")


def merge(base: dict, override: dict) -> dict:
    """Recursive merge; mappings merge key by key, other values replace."""
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "profiles":
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_document(path=None, preset=None, overrides=None) -> dict:
    doc = default_document()
    if preset is not None:
        doc = merge(doc, preset_document(preset))
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        doc = merge(doc, _read_yaml(text, str(path)))
    if overrides:
        doc = merge(doc, overrides)
    return doc


def _check_keys(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError("must be a mapping", where)
    unknown = sorted(set(section) - allowed)
    if unknown:
        key = f"{where}.{unknown[0]}" if where else unknown[0]
        raise ConfigError("unknown key", key)


def _number(value, key, kind=float):
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"expected a number, got {value!r}", key)
    try:
        out = kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a number, got {value!r}", key) from exc
    if kind is int and out != value:
        raise ConfigError(f"expected an integer, got {value!r}", key)
    if kind is float and not np.isfinite(out):
        raise ConfigError("must be finite", key)
    return out


def _tf(section, key):
    try:
        return DiscreteTransferFunction(section["num"], section["den"],
                                        float(section.get("dt", 1.0)))
    except KeyError as exc:
        raise ConfigError("missing coefficients", f"{key}.{exc.args[0]}") from exc
    except (SBFError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), key) from exc


def _weight(value, N, key):
    if isinstance(value, (list, tuple)):
        arr = np.array([_number(x, key) for x in value])
        if arr.size != N:
            raise ConfigError(f"has {arr.size} entries, expected {N}", key)
        return arr
    return np.full(N, _number(value, key))


def _schedule(items, n_trials):
    if not isinstance(items, list) or not items:
        raise ConfigError("must be a non-empty list", "schedule")
    out = []
    for i, item in enumerate(items):
        where = f"schedule[{i}]"
        _check_keys(item, {"profile", "first", "last"}, where)
        try:
            out.append(Segment(str(item["profile"]),
                               _number(item["first"], f"{where}.first", int),
                               _number(item["last"], f"{where}.last", int)))
        except KeyError as exc:
            raise ConfigError("missing", f"{where}.{exc.args[0]}") from exc
    return out


def build_config(doc: dict) -> ExperimentConfig:
    """Validate a merged document and turn it into an ``ExperimentConfig``."""
    _check_keys(doc, _TOP_KEYS, "")
    for sec, keys in _SECTION_KEYS.items():
        if sec in doc and doc[sec] is not None:
            _check_keys(doc[sec], keys, sec)
    for req in ("plant", "controller", "method", "profiles", "schedule"):
        if doc.get(req) is None:
            raise ConfigError("required", req)

    N = _number(doc.get("trial_length"), "trial_length", int)
    n_trials = _number(doc.get("trials"), "trials", int)
    if N < 1:
        raise ConfigError("must be >= 1", "trial_length")
    plant = _tf(doc["plant"], "plant")
    controller = _tf(doc["controller"], "controller")

    profiles = {}
    if not isinstance(doc["profiles"], dict) or not doc["profiles"]:
        raise ConfigError("must be a non-empty mapping", "profiles")
    for pid, p in doc["profiles"].items():
        where = f"profiles.{pid}"
        _check_keys(p, _PROFILE_KEYS, where)
        missing = sorted(_PROFILE_KEYS - set(p))
        if missing:
            raise ConfigError("missing", f"{where}.{missing[0]}")
        try:
            profiles[str(pid)] = MotionProfile(
                **{k: _number(v, f"{where}.{k}") for k, v in p.items()})
        except SBFError as exc:
            raise ConfigError(str(exc), where) from exc

    basis = doc.get("basis") or {}
    w = doc.get("weights") or {}
    weights = Weights(_weight(w.get("e", 1.0), N, "weights.e"),
                      _weight(w.get("f", 0.0), N, "weights.f"),
                      _weight(w.get("df", 0.0), N, "weights.df"))

    cfg = ExperimentConfig(
        plant=plant,
        controller=controller,
        N=N,
        n_trials=n_trials,
        method=str(doc["method"]),
        profiles=profiles,
        schedule=_schedule(doc["schedule"], n_trials),
        weights=weights,
        n_basis=_number(basis.get("n_theta_total", 200), "basis.n_theta_total", int),
        preview=_number(basis.get("preview", 6), "basis.preview", int),
        n_sparse=_number(doc.get("sparsity", 9), "sparsity", int),
        basis=basis.get("kind"),
        noise_std=0.0,
        seed=_number(doc.get("seed", 0), "seed", int),
        reset_on_switch=bool(doc.get("reset_on_switch", False)),
        learner_gain=_number(doc.get("learner_gain", 1.0), "learner_gain"),
        allow_pseudo_inverse=bool(doc.get("allow_pseudo_inverse", True)),
        name=str(doc.get("name") or ""),
    )
    cfg.noise_std = _noise_std(doc.get("noise") or {}, cfg)
    cfg.validate()
    for pid, prof in profiles.items():
        try:
            fourth_order_reference(prof, N)
        except SBFError as exc:
            raise ConfigError(str(exc), f"profiles.{pid}") from exc
    return cfg


def _noise_std(noise, cfg):
    """Absolute ``std`` wins; otherwise ``relative`` times the peak reference."""
    std = noise.get("std")
    if std is not None:
        return _number(std, "noise.std")
    rel = _number(noise.get("relative", 0.0), "noise.relative")
    if rel < 0:
        raise ConfigError("must be >= 0", "noise.relative")
    if rel == 0:
        return 0.0
    peak = max(p.displacement for p in cfg.profiles.values())
    return rel * abs(peak)


def load_config(path=None, preset=None, overrides=None) -> ExperimentConfig:
    return build_config(load_document(path, preset, overrides))


def parse_config(text: str, preset=None) -> ExperimentConfig:
    """Build a config from YAML text layered over the shipped defaults."""
    return build_config(load_document(None, preset, _read_yaml(text, "<text>")))
