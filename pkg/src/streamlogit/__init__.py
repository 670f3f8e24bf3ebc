"""Streaming logistic regression via stochastic Newton recursions.

Single-pass estimators (truncated stochastic Newton, stochastic Newton,
SGD, averaged SGD, recursive least squares) with rank-one inverse updates,
Monte-Carlo oracles for the population objective, Wald-type inference, data
simulation, and a seeded replication benchmark harness.
"""

from . import bench, inference, oracle, simulate
from ._backend import available_backends, default_backend
from .estimators import (
    ALGORITHMS,
    DivergenceError,
    EstimatorState,
    FitResult,
    StepSchedule,
    TruncationConfig,
    asgd_step,
    fit_stream,
    initial_state,
    load_snapshot,
    rls_step,
    save_snapshot,
    sgd_step,
    sn_step,
    truncation_weight,
    tsn_step,
)
from .model import (
    Observation,
    alpha_weight,
    bernoulli_weight,
    per_sample_gradient,
    per_sample_loss,
    sigmoid,
)
from .riccati import InverseAccumulator, direct_inverse, extreme_eigenvalues, rank_one_update

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "DivergenceError",
    "EstimatorState",
    "FitResult",
    "InverseAccumulator",
    "Observation",
    "StepSchedule",
    "TruncationConfig",
    "alpha_weight",
    "asgd_step",
    "available_backends",
    "bernoulli_weight",
    "default_backend",
    "direct_inverse",
    "extreme_eigenvalues",
    "fit_stream",
    "initial_state",
    "load_snapshot",
    "per_sample_gradient",
    "per_sample_loss",
    "rank_one_update",
    "rls_step",
    "save_snapshot",
    "sgd_step",
    "sigmoid",
    "sn_step",
    "truncation_weight",
    "tsn_step",
    "__version__",
]
