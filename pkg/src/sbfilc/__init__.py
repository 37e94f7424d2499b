"""Sparse basis-function iterative learning control on lifted LTI models.

The package simulates repeated trials of a discrete SISO feedback loop in
lifted (trial-vector) form and learns a feedforward ``f = Psi(r) theta``
from trial to trial, either with a quadratic (norm-optimal) update or by
selecting a few basis columns with LARS-LASSO and refitting them.
"""

from .basis import BasisMatrix, custom_basis, fir_basis, identity_basis, physical_basis
from .config import load_config, parse_config
from .engine import ExperimentConfig, Segment, TrialRecord, loss_factor, run_experiment, run_trial
from .errors import (
    CollinearityError,
    ConfigError,
    DimensionError,
    IllPosedLoopError,
    InvalidSystemError,
    OutputError,
    ParameterError,
    RankDeficiencyError,
    SBFError,
    SolverError,
    TrialError,
    UnsupportedWeightsError,
)
from .lifted import (
    DiscreteTransferFunction,
    LiftedOperator,
    closed_loop_operators,
    impulse_response,
    lift,
    sensitivity_tfs,
    toeplitz_from_impulse,
)
from .norm_optimal import UpdateMatrices, Weights, lq_matrices, no_update, objective
from .sparse import (
    LarsPath,
    RegressionProblem,
    SparseSolution,
    build_regression,
    debias,
    lars_lasso,
    lasso_oracle,
    sparse_update,
)
from .trajectory import MotionProfile, ReferenceSignal, fourth_order_reference

__version__ = "0.1.0"
