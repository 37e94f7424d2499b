import dataclasses

import numpy as np
import pytest

from sbfilc.engine import ExperimentConfig, Segment, loss_factor, run_experiment, run_trial
from sbfilc.errors import ConfigError, DimensionError, RankDeficiencyError, TrialError
from sbfilc.lifted import DiscreteTransferFunction, closed_loop_operators, identity
from sbfilc.norm_optimal import Weights
from sbfilc.trajectory import MotionProfile

N = 120
PROFILES = {
    "a": MotionProfile(0.01, 0.5, 50, 5000, 5e5),
    "b": MotionProfile(0.02, 0.6, 60, 6000, 6e5),
}


def small_cfg(method="no", n_trials=6, **kw):
    base = dict(
        plant=DiscreteTransferFunction([0.0, 0.2, 0.1], [1.0, -1.2, 0.5]),
        controller=DiscreteTransferFunction([1.0], [1.0]),
        N=N,
        n_trials=n_trials,
        method=method,
        profiles=PROFILES,
        schedule=[Segment("a", 1, n_trials // 2), Segment("b", n_trials // 2 + 1, n_trials)],
        n_basis=12,
        preview=3,
        n_sparse=4,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_trial_formula(rng):
    S = identity(4)
    J = identity(4)
    r, f, v = rng.standard_normal((3, 4))
    np.testing.assert_allclose(run_trial(S, J, r, f, v), r - v - f)
    with pytest.raises(DimensionError):
        run_trial(S, J, r[:3], f, v)


def test_single_trial_record():
    cfg = small_cfg(n_trials=1, schedule=[Segment("a", 1, 1)])
    (rec,) = run_experiment(cfg)
    assert rec.j == 1 and rec.reference == "a"
    assert not np.any(rec.theta) and not np.any(rec.f)
    assert rec.e.shape == (N,) and rec.error_norm > 0


@pytest.mark.parametrize("method", ["no", "no_fir", "bf", "sbf"])
def test_feedforward_is_basis_times_parameters(method):
    from sbfilc.engine import build_references, make_basis
    cfg = small_cfg(method)
    refs = build_references(cfg)
    for rec in run_experiment(cfg):
        psi = make_basis(cfg, refs[rec.reference])
        np.testing.assert_allclose(rec.f, psi.matrix @ rec.theta, atol=1e-14)


@pytest.mark.parametrize("method", ["no", "no_fir", "bf", "sbf"])
def test_runs_are_deterministic(method):
    cfg = small_cfg(method, noise_std=1e-4, seed=7)
    a, b = run_experiment(cfg), run_experiment(cfg)
    for x, y in zip(a, b):
        assert np.array_equal(x.e, y.e) and np.array_equal(x.theta, y.theta)
    c = run_experiment(dataclasses.replace(cfg, seed=8))
    assert not np.array_equal(a[-1].e, c[-1].e)


@pytest.mark.parametrize("method", ["no", "no_fir", "bf"])
def test_noise_free_monotone_convergence(method):
    cfg = small_cfg(method, n_trials=8, schedule=[Segment("a", 1, 8)])
    norms = [r.error_norm for r in run_experiment(cfg)]
    floor = 1e-12 * norms[0]  # round-off plateau once converged
    assert all(b <= a * (1 + 1e-9) + floor for a, b in zip(norms, norms[1:]))
    assert norms[-1] < norms[0]


def test_no_is_deadbeat_without_effort_weights():
    cfg = small_cfg("no", n_trials=3, schedule=[Segment("a", 1, 3)])
    recs = run_experiment(cfg)
    assert recs[1].error_norm < 1e-9 * recs[0].error_norm


def test_reset_on_switch_zeroes_parameters():
    cfg = small_cfg("bf", n_trials=6, reset_on_switch=True)
    recs = run_experiment(cfg)
    assert not np.any(recs[3].theta) and np.any(recs[2].theta)
    kept = run_experiment(dataclasses.replace(cfg, reset_on_switch=False))
    assert np.any(kept[3].theta)


def test_sbf_cardinality_and_support():
    cfg = small_cfg("sbf", n_trials=6, n_sparse=3)
    for rec in run_experiment(cfg):
        assert rec.n_nonzero <= 3
        assert set(np.flatnonzero(rec.theta)) <= set(range(cfg.n_basis))


def test_solver_failure_is_wrapped_with_trial_index():
    cfg = small_cfg("no_fir", n_trials=3, schedule=[Segment("a", 1, 3)],
                    n_basis=N, preview=0, allow_pseudo_inverse=False)
    with pytest.raises(TrialError) as info:
        run_experiment(cfg)
    assert info.value.trial == 1
    assert isinstance(info.value.__cause__, RankDeficiencyError)
    assert info.value.exit_code == RankDeficiencyError.exit_code


def test_custom_operators_are_used():
    cfg = small_cfg("no", n_trials=2, schedule=[Segment("a", 1, 2)])
    S, J = closed_loop_operators(cfg.plant, cfg.controller, N)
    a = run_experiment(cfg, (S, J))
    b = run_experiment(cfg)
    np.testing.assert_array_equal(a[-1].e, b[-1].e)


class _Rec:
    def __init__(self, j, norm):
        self.j, self.error_norm = j, norm


def test_loss_factor_examples():
    recs = [_Rec(1, 2.0), _Rec(2, 2.0), _Rec(3, 6.0)]
    assert loss_factor(recs, 2) == (1.0, True)
    assert loss_factor(recs, 3) == (3.0, True)
    zero = [_Rec(1, 0.0), _Rec(2, 1.0)]
    ratio, ok = loss_factor(zero, 2)
    assert ratio == float("inf") and not ok
    with pytest.raises(ConfigError):
        loss_factor(recs, 1)


def test_switch_trials():
    assert small_cfg(n_trials=6).switch_trials == [4]
    assert small_cfg(n_trials=4, schedule=[Segment("a", 1, 4)]).switch_trials == []


@pytest.mark.parametrize("kw, key", [
    (dict(n_trials=0, schedule=[]), "trials"),
    (dict(N=0), "trial_length"),
    (dict(noise_std=-1.0), "noise.std"),
    (dict(schedule=[Segment("a", 1, 4), Segment("b", 3, 6)]), "schedule"),
    (dict(schedule=[Segment("a", 1, 2), Segment("b", 4, 6)]), "schedule"),
    (dict(schedule=[Segment("zzz", 1, 6)]), "schedule"),
    (dict(method="no_fir", n_basis=3, preview=3), "basis"),
    (dict(weights=Weights.scalar(N, e=0.0)), "weights.e"),
    (dict(weights=Weights.scalar(N - 1)), "weights"),
    (dict(method="sbf", n_sparse=13), "sparsity"),
    (dict(method="bogus"), "method"),
])
def test_invalid_configs(kw, key):
    with pytest.raises(ConfigError) as info:
        small_cfg(**kw)
    assert info.value.path == key
