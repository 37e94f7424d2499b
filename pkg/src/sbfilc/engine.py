"""Trial loop of basis-function ILC on a simulated closed loop.

One trial measures ``e = S r - J f - S v``; the parameters are then updated
either by the analytic norm-optimal law or by LARS selection plus
debiasing (``sbf``).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisMatrix, fir_basis, identity_basis, physical_basis
from .errors import ConfigError, DimensionError, SBFError, TrialError
from .lifted import DiscreteTransferFunction, LiftedOperator, closed_loop_operators
from .norm_optimal import Weights, lq_matrices, no_update
from .sparse import build_regression, sparse_update
from .trajectory import MotionProfile, ReferenceSignal, fourth_order_reference

log = logging.getLogger(__name__)

METHODS = ("sbf", "bf", "no_fir", "no")
DEFAULT_BASIS = {"sbf": "fir", "bf": "physical", "no_fir": "fir", "no": "identity"}


@dataclass(frozen=True)
class Segment:
    profile: str
    first: int
    last: int


@dataclass
class ExperimentConfig:
    plant: DiscreteTransferFunction
    controller: DiscreteTransferFunction
    N: int
    n_trials: int
    method: str
    profiles: dict
    schedule: list
    weights: Weights = None
    n_basis: int = 200          # N_theta for FIR bases
    preview: int = 6
    n_sparse: int = 9           # target cardinality for sbf
    basis: str = None
    noise_std: float = 0.0
    seed: int = 0
    reset_on_switch: bool = False
    learner_gain: float = 1.0
    allow_pseudo_inverse: bool = True
    name: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}", "method")
        if self.basis is None:
            self.basis = DEFAULT_BASIS[self.method]
        if self.weights is None:
            self.weights = Weights.scalar(self.N)
        self.schedule = [s if isinstance(s, Segment) else Segment(*s) for s in self.schedule]
        self.validate()

    def validate(self):
        if self.N < 1:
            raise ConfigError("must be >= 1", "trial_length")
        if self.n_trials < 1:
            raise ConfigError("must be >= 1", "trials")
        if self.noise_std < 0:
            raise ConfigError("must be >= 0", "noise.std")
        if self.weights.N != self.N:
            raise ConfigError(f"weights have length {self.weights.N}, expected {self.N}",
                              "weights")
        if not np.any(self.weights.e > 0):
            raise ConfigError("W_e needs at least one positive entry", "weights.e")
        if self.basis == "fir" and not 0 <= self.preview < self.n_basis <= self.N:
            raise ConfigError(
                f"need 0 <= preview < n_theta_total <= N (preview={self.preview}, "
                f"n_theta_total={self.n_basis}, N={self.N})", "basis")
        if self.method == "sbf":
            width = {"fir": self.n_basis, "physical": 3, "identity": self.N}[self.basis]
            if not 1 <= self.n_sparse <= width:
                raise ConfigError(f"must lie in [1, {width}]", "sparsity")
        covered = []
        for seg in sorted(self.schedule, key=lambda s: s.first):
            if seg.profile not in self.profiles:
                raise ConfigError(f"unknown profile {seg.profile!r}", "schedule")
            if seg.first > seg.last:
                raise ConfigError(f"empty range [{seg.first}, {seg.last}]", "schedule")
            covered.extend(range(seg.first, seg.last + 1))
        if covered != list(range(1, self.n_trials + 1)):
            raise ConfigError(
                f"trial ranges must partition [1, {self.n_trials}] without overlap",
                "schedule")

    def profile_at(self, j) -> str:
        for seg in self.schedule:
            if seg.first <= j <= seg.last:
                return seg.profile
        raise ConfigError(f"trial {j} not covered", "schedule")

    @property
    def switch_trials(self) -> list:
        ids = [self.profile_at(j) for j in range(1, self.n_trials + 1)]
        return [j for j in range(2, self.n_trials + 1) if ids[j - 1] != ids[j - 2]]


@dataclass(frozen=True, eq=False)
class TrialRecord:
    j: int
    reference: str
    theta: np.ndarray
    f: np.ndarray
    e: np.ndarray
    update_time: float
    support: tuple = ()

    @property
    def error_norm(self) -> float:
        return float(np.linalg.norm(self.e))

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.theta))


def run_trial(S: LiftedOperator, J: LiftedOperator, r, f, v) -> np.ndarray:
    """Lifted closed-loop error of one trial."""
    r, f, v = (np.asarray(x, dtype=float) for x in (r, f, v))
    N = S.N
    if J.N != N or any(x.shape != (N,) for x in (r, f, v)):
        raise DimensionError("trial signals and operators differ in length")
    return S.matrix @ (r - v) - J.matrix @ f


def make_basis(cfg: ExperimentConfig, ref: ReferenceSignal) -> BasisMatrix:
    if cfg.basis == "fir":
        return fir_basis(ref.r, cfg.n_basis, cfg.preview)
    if cfg.basis == "physical":
        return physical_basis(ref)
    if cfg.basis == "identity":
        return identity_basis(cfg.N)
    raise ConfigError(f"basis {cfg.basis!r} cannot be built from a config", "basis")


def build_references(cfg: ExperimentConfig) -> dict:
    out = {}
    for name, prof in cfg.profiles.items():
        if not isinstance(prof, MotionProfile):
            prof = MotionProfile(**prof)
        out[name] = fourth_order_reference(prof, cfg.N)
    return out


def run_experiment(cfg: ExperimentConfig, operators=None) -> list:
    """Run all trials of ``cfg`` and return one ``TrialRecord`` per trial."""
    S, J = operators if operators is not None else closed_loop_operators(
        cfg.plant, cfg.controller, cfg.N)
    J_learn = J if cfg.learner_gain == 1.0 else LiftedOperator(cfg.learner_gain * J.matrix)
    refs = build_references(cfg)
    rng = np.random.default_rng(cfg.seed)
    W = cfg.weights

    bases, laws = {}, {}
    theta = None
    current = None
    records = []
    for j in range(1, cfg.n_trials + 1):
        ref_id = cfg.profile_at(j)
        ref = refs[ref_id]
        if ref_id not in bases:
            bases[ref_id] = make_basis(cfg, ref)
        psi = bases[ref_id]
        if theta is None or (cfg.reset_on_switch and ref_id != current):
            theta = np.zeros(psi.n_params)
        current = ref_id

        f = psi.feedforward(theta)
        v = cfg.noise_std * rng.standard_normal(cfg.N)
        e = run_trial(S, J, ref.r, f, v)

        t0 = time.perf_counter()
        support = ()
        try:
            if cfg.method == "sbf":
                prob = build_regression(e, theta, J_learn, psi, W)
                theta_next, sol, _ = sparse_update(prob, cfg.n_sparse)
                support = sol.support if sol is not None else ()
            else:
                if ref_id not in laws:
                    laws[ref_id] = lq_matrices(J_learn, psi, W, cfg.allow_pseudo_inverse)
                theta_next = no_update(theta, e, laws[ref_id])
        except SBFError as exc:
            raise TrialError(j, exc) from exc
        elapsed = time.perf_counter() - t0

        records.append(TrialRecord(j, ref_id, theta.copy(), f, e, elapsed, support))
        log.debug("trial %d (%s): |e|=%.6g nnz=%d", j, ref_id,
                  records[-1].error_norm, records[-1].n_nonzero)
        theta = theta_next
    return records


def loss_factor(records, switch_trial: int):
    """``|e_switch| / |e_(switch-1)|``; returns ``(ratio, ok)``.

    ``ok`` is False when the denominator is zero (ratio is then ``inf``).
    """
    by_j = {r.j: r for r in records}
    if switch_trial not in by_j or switch_trial - 1 not in by_j:
        raise ConfigError(f"switch trial {switch_trial} outside the recorded range")
    num = by_j[switch_trial].error_norm
    den = by_j[switch_trial - 1].error_norm
    if den == 0.0:
        return float("inf"), False
    return num / den, True
