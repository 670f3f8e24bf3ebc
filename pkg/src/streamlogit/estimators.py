"""Recursive single-pass estimators for streaming logistic regression.

Five algorithms share one state type and one stream driver:

``tsn``
    Newton-type recursion whose curvature weight is floored at
    ``c_alpha * n**-beta``; the parameter moves with the inverse from the
    previous step, and the accumulator is updated afterwards.
``sn``
    Same recursion without the floor, and with the opposite ordering: the
    inverse is updated first and the parameter moves with the current one.
``sgd`` / ``asgd``
    Plain stochastic gradient with step ``c_gamma * n**-a``, and its
    running-mean (Polyak-Ruppert) average.
``rls``
    Recursive least squares for a linear response; unit curvature weight.

Each step costs O(dim^2) (O(dim) for the gradient variants) and touches one
observation. The hot loops live in the kernel backends; see
:mod:`streamlogit._backend`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from ._backend import get_kernels
from .model import Observation, bernoulli_weight
from .riccati import InverseAccumulator

__all__ = [
    "ALGORITHMS",
    "TruncationConfig",
    "StepSchedule",
    "EstimatorState",
    "DivergenceError",
    "FitResult",
    "initial_state",
    "truncation_weight",
    "tsn_step",
    "sn_step",
    "sgd_step",
    "asgd_step",
    "rls_step",
    "fit_stream",
    "save_snapshot",
    "load_snapshot",
]

ALGORITHMS = ("tsn", "sn", "sgd", "asgd", "rls")

_NEWTON_LIKE = frozenset({"tsn", "sn", "rls"})
_GRADIENT_LIKE = frozenset({"sgd", "asgd"})
_CHUNK = 8192


@dataclass(frozen=True)
class TruncationConfig:
    """Floor for the curvature weight: ``max(a_hat, c_alpha * n**-beta)``."""

    c_alpha: float = 1e-10
    beta: float = 0.49

    def __post_init__(self):
        if not (self.c_alpha > 0 and math.isfinite(self.c_alpha)):
            raise ValueError(f"c_alpha must be positive and finite, got {self.c_alpha}")
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 0.5), got {self.beta}")


@dataclass(frozen=True)
class StepSchedule:
    """Gradient step sequence ``c_gamma * n**-exponent``."""

    c_gamma: float = 1.0
    exponent: float = 0.66

    def __post_init__(self):
        if not (self.c_gamma > 0 and math.isfinite(self.c_gamma)):
            raise ValueError(f"c_gamma must be positive and finite, got {self.c_gamma}")
        if not 0.5 < self.exponent <= 1.0:
            raise ValueError(f"exponent must lie in (0.5, 1], got {self.exponent}")


@dataclass
class EstimatorState:
    """Snapshot of one estimator after ``n`` observations.

    ``theta`` is the current iterate; Newton-type algorithms also carry the
    inverse accumulator, and ``asgd`` carries the running mean of all
    iterates so far. States are treated as immutable: step functions and
    :func:`fit_stream` return new ones.
    """

    algorithm: str
    theta: np.ndarray
    n: int = 0
    acc: Optional[InverseAccumulator] = None
    theta_bar: Optional[np.ndarray] = None
    config: Union[TruncationConfig, StepSchedule, None] = None

    @property
    def dim(self) -> int:
        return self.theta.size

    @property
    def estimate(self) -> np.ndarray:
        """The reported estimate: the running mean for asgd, else theta."""
        return self.theta_bar if self.algorithm == "asgd" else self.theta


class DivergenceError(RuntimeError):
    """The state went non-finite; ``step`` is the offending 1-based index."""

    def __init__(self, step: int, trace: Optional[np.ndarray] = None):
        super().__init__(f"non-finite estimator state at step {step}")
        self.step = step
        self.trace = trace


@dataclass
class FitResult:
    state: EstimatorState
    trace: Optional[np.ndarray] = None


def _default_config(algorithm: str):
    if algorithm == "tsn":
        return TruncationConfig()
    if algorithm in _GRADIENT_LIKE:
        return StepSchedule()
    return None


def initial_state(
    algorithm: str,
    dim: int,
    *,
    theta0: Optional[np.ndarray] = None,
    config=None,
) -> EstimatorState:
    """Fresh state: theta0 (default zero), identity accumulator, n = 0."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choices: {ALGORITHMS}")
    if theta0 is None:
        theta = np.zeros(dim)
    else:
        theta = np.array(theta0, dtype=np.float64)
        if theta.shape != (dim,):
            raise ValueError(f"theta0 has shape {theta.shape}, expected ({dim},)")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta0 has non-finite coordinates")
    if config is None:
        config = _default_config(algorithm)
    elif algorithm == "tsn" and not isinstance(config, TruncationConfig):
        raise TypeError("tsn expects a TruncationConfig")
    elif algorithm in _GRADIENT_LIKE and not isinstance(config, StepSchedule):
        raise TypeError(f"{algorithm} expects a StepSchedule")
    elif algorithm in ("sn", "rls"):
        raise TypeError(f"{algorithm} takes no configuration")
    acc = InverseAccumulator.identity(dim) if algorithm in _NEWTON_LIKE else None
    theta_bar = theta.copy() if algorithm == "asgd" else None
    return EstimatorState(
        algorithm=algorithm, theta=theta, n=0, acc=acc, theta_bar=theta_bar, config=config
    )


def truncation_weight(h: np.ndarray, phi: np.ndarray, n: int, cfg: TruncationConfig) -> float:
    """Curvature weight with the decay floor: ``max(a_hat, c_alpha * n**-beta)``."""
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    h = np.asarray(h, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if h.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {phi.shape}")
    return max(bernoulli_weight(float(h @ phi)), cfg.c_alpha * n ** (-cfg.beta))


def _as_pair(obs) -> tuple[np.ndarray, float]:
    if isinstance(obs, Observation):
        return obs.phi, obs.y
    phi, y = obs
    phi = np.asarray(phi, dtype=np.float64)
    y = float(y)
    if phi.ndim != 1:
        raise ValueError("covariate vector must be 1-d")
    if not (np.all(np.isfinite(phi)) and math.isfinite(y)):
        raise ValueError("non-finite observation")
    return phi, y


def _run_block(kernels, algorithm, config, buf, n_start, phi, y, trace, theta_ref) -> int:
    if algorithm == "tsn":
        return kernels.run_tsn(
            buf["theta"], buf["inv"], phi, y, n_start, config.c_alpha, config.beta, trace, theta_ref
        )
    if algorithm == "sn":
        return kernels.run_sn(buf["theta"], buf["inv"], phi, y, n_start, trace, theta_ref)
    if algorithm == "rls":
        return kernels.run_rls(buf["theta"], buf["inv"], phi, y, n_start, trace, theta_ref)
    if algorithm == "sgd":
        return kernels.run_sgd(
            buf["theta"], phi, y, n_start, config.c_gamma, config.exponent, trace, theta_ref
        )
    if algorithm == "asgd":
        return kernels.run_asgd(
            buf["theta"], buf["theta_bar"], phi, y, n_start,
            config.c_gamma, config.exponent, trace, theta_ref,
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _buffers(state: EstimatorState) -> dict:
    return {
        "theta": state.theta.copy(),
        "inv": state.acc.inv.copy() if state.acc is not None else None,
        "theta_bar": state.theta_bar.copy() if state.theta_bar is not None else None,
    }


def _rebuild(state: EstimatorState, buf: dict, n_new: int) -> EstimatorState:
    acc = None
    if state.acc is not None:
        acc = InverseAccumulator(inv=buf["inv"], n_updates=n_new)
    return EstimatorState(
        algorithm=state.algorithm,
        theta=buf["theta"],
        n=n_new,
        acc=acc,
        theta_bar=buf["theta_bar"],
        config=state.config,
    )


def _single_step(state: EstimatorState, obs, algorithm: str, backend=None) -> EstimatorState:
    if state.algorithm != algorithm:
        raise ValueError(f"state belongs to {state.algorithm!r}, not {algorithm!r}")
    phi, y = _as_pair(obs)
    if phi.shape != (state.dim,):
        raise ValueError(f"dimension mismatch: state is {state.dim}-dim, phi has shape {phi.shape}")
    buf = _buffers(state)
    phi_block = np.ascontiguousarray(phi[None, :])
    y_block = np.array([y])
    bad = _run_block(get_kernels(backend), algorithm, state.config, buf, state.n, phi_block, y_block, None, None)
    if bad:
        raise DivergenceError(bad)
    return _rebuild(state, buf, state.n + 1)


def tsn_step(state: EstimatorState, obs) -> EstimatorState:
    """One truncated-Newton step: parameter first (previous inverse), then
    the accumulator with the floored weight evaluated at the pre-step theta."""
    return _single_step(state, obs, "tsn")


def sn_step(state: EstimatorState, obs) -> EstimatorState:
    """One Newton step: accumulator first, parameter with the current inverse."""
    return _single_step(state, obs, "sn")


def sgd_step(state: EstimatorState, obs) -> EstimatorState:
    """One gradient step with step size ``c_gamma * n**-exponent``."""
    return _single_step(state, obs, "sgd")


def asgd_step(state: EstimatorState, obs) -> EstimatorState:
    """One gradient step plus the exact running-mean update of theta_bar."""
    return _single_step(state, obs, "asgd")


def rls_step(state: EstimatorState, obs) -> EstimatorState:
    """One least-squares step; ``obs`` may be a ``(phi, y)`` pair with any
    finite real response."""
    return _single_step(state, obs, "rls")


def _validate_block(algorithm: str, phi: np.ndarray, y: np.ndarray, dim: Optional[int]):
    if phi.ndim != 2 or y.ndim != 1 or phi.shape[0] != y.shape[0]:
        raise ValueError(f"expected phi (m, dim) with matching y (m,), got {phi.shape} and {y.shape}")
    if dim is not None and phi.shape[1] != dim:
        raise ValueError(f"dimension mismatch: state is {dim}-dim, phi has width {phi.shape[1]}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("covariates contain non-finite values")
    if not np.all(np.isfinite(y)):
        raise ValueError("responses contain non-finite values")
    if algorithm != "rls" and not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError(f"labels must be 0 or 1 for algorithm {algorithm!r}")


def _iter_blocks(observations, algorithm: str, dim: Optional[int]) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    if isinstance(observations, tuple) and len(observations) == 2 and not isinstance(observations[0], Observation):
        phi = np.ascontiguousarray(observations[0], dtype=np.float64)
        y = np.ascontiguousarray(observations[1], dtype=np.float64)
        _validate_block(algorithm, phi, y, dim)
        if phi.shape[0]:
            yield phi, y
        return
    it = iter(observations)
    while True:
        batch = list(islice(it, _CHUNK))
        if not batch:
            return
        pairs = [_as_pair(o) for o in batch]
        phi = np.ascontiguousarray([p for p, _ in pairs], dtype=np.float64)
        y = np.array([v for _, v in pairs])
        _validate_block(algorithm, phi, y, dim)
        yield phi, y


def fit_stream(
    algorithm: str,
    observations: Union[Iterable, tuple[np.ndarray, np.ndarray]],
    *,
    config=None,
    theta0: Optional[np.ndarray] = None,
    state: Optional[EstimatorState] = None,
    theta_ref: Optional[np.ndarray] = None,
    backend: Optional[str] = None,
) -> FitResult:
    """Fold a stream of observations into an estimator state, in order.

    ``observations`` is either a pair of arrays ``(phi, y)`` with phi of
    shape (m, dim), or any iterable of :class:`Observation` / ``(phi, y)``
    pairs, which is consumed in constant-memory chunks. Passing ``state``
    resumes from a previous fit (``theta0``/``config`` must then be left
    unset). When ``theta_ref`` is given, the squared distance of the
    reported estimate from it is recorded after every step and returned as
    the trace.

    Raises :class:`DivergenceError` (carrying the 1-based step index and
    the trace up to the failure) if the state goes non-finite, and
    ``ValueError`` on an empty stream.
    """
    if state is not None:
        if state.algorithm != algorithm:
            raise ValueError(f"state belongs to {state.algorithm!r}, not {algorithm!r}")
        if theta0 is not None or config is not None:
            raise ValueError("theta0/config cannot be overridden when resuming from a state")
    kernels = get_kernels(backend)
    if theta_ref is not None:
        theta_ref = np.ascontiguousarray(theta_ref, dtype=np.float64)

    buf = None
    n = 0
    traces = []
    for phi, y in _iter_blocks(observations, algorithm, state.dim if state else None):
        if buf is None:
            if state is None:
                state = initial_state(algorithm, phi.shape[1], theta0=theta0, config=config)
            buf = _buffers(state)
            n = state.n
        if phi.shape[1] != state.dim:
            raise ValueError(
                f"dimension changed mid-stream at step {n + 1}: expected {state.dim}, got {phi.shape[1]}"
            )
        if theta_ref is not None and theta_ref.shape != (phi.shape[1],):
            raise ValueError(f"theta_ref has shape {theta_ref.shape}, expected ({phi.shape[1]},)")
        trace = np.empty(phi.shape[0]) if theta_ref is not None else None
        bad = _run_block(kernels, algorithm, state.config, buf, n, phi, y, trace, theta_ref)
        if bad:
            if trace is not None:
                traces.append(trace[: bad - n - 1])
                partial = np.concatenate(traces) if traces else None
            else:
                partial = None
            raise DivergenceError(bad, partial)
        if trace is not None:
            traces.append(trace)
        n += phi.shape[0]
    if buf is None:
        raise ValueError("empty observation stream")
    result_state = _rebuild(state, buf, n)
    return FitResult(state=result_state, trace=np.concatenate(traces) if traces else None)


def save_snapshot(state: EstimatorState, path) -> None:
    """Write a JSON snapshot that :func:`load_snapshot` restores exactly."""
    doc: dict = {"algorithm": state.algorithm, "n": state.n, "theta": state.theta.tolist()}
    if state.acc is not None:
        doc["inv"] = state.acc.inv.tolist()
    if state.theta_bar is not None:
        doc["theta_bar"] = state.theta_bar.tolist()
    if isinstance(state.config, TruncationConfig):
        doc["config"] = {"c_alpha": state.config.c_alpha, "beta": state.config.beta}
    elif isinstance(state.config, StepSchedule):
        doc["config"] = {"c_gamma": state.config.c_gamma, "exponent": state.config.exponent}
    else:
        doc["config"] = {}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_snapshot(path) -> EstimatorState:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    algorithm = doc["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ValueError(f"snapshot names unknown algorithm {algorithm!r}")
    n = int(doc["n"])
    theta = np.array(doc["theta"], dtype=np.float64)
    acc = None
    if "inv" in doc:
        inv = np.array(doc["inv"], dtype=np.float64)
        if inv.shape != (theta.size, theta.size):
            raise ValueError(f"snapshot inverse has shape {inv.shape}, expected {(theta.size,) * 2}")
        acc = InverseAccumulator(inv=inv, n_updates=n)
    elif algorithm in _NEWTON_LIKE:
        raise ValueError(f"snapshot for {algorithm!r} is missing the inverse accumulator")
    theta_bar = np.array(doc["theta_bar"], dtype=np.float64) if "theta_bar" in doc else None
    if algorithm == "asgd" and theta_bar is None:
        raise ValueError("asgd snapshot is missing theta_bar")
    raw = doc.get("config") or {}
    if algorithm == "tsn":
        config = TruncationConfig(**raw)
    elif algorithm in _GRADIENT_LIKE:
        config = StepSchedule(**raw)
    else:
        config = None
    return EstimatorState(
        algorithm=algorithm, theta=theta, n=n, acc=acc, theta_bar=theta_bar, config=config
    )
