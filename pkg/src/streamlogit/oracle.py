"""Monte-Carlo estimates of the population objective, gradient and Hessian.

The label is integrated out analytically (its conditional mean given the
covariates is the logistic link), so every estimator here averages a
function of the covariates only. That makes the gradient exactly zero at
the true parameter and shrinks the variance compared with sampling labels.

Sampling is split into fixed-size chunks, each drawn from its own keyed
Philox stream (see :mod:`streamlogit._rng`). The chunk layout depends only
on ``(seed, n_samples)``, and partial sums are reduced in chunk order, so
results are bit-identical for any worker count.

A "design" is any object with an integer attribute ``d`` and a method
``sample(rng, size)`` returning a ``(size, d)`` array of covariates; see
:class:`streamlogit.simulate.DesignSpec`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._rng import DOMAIN_ORACLE, keyed_rng
from .model import bernoulli_weight, sigmoid

__all__ = ["OracleEstimate", "mc_objective", "mc_gradient", "mc_hessian", "hessian_eigen_table"]

CHUNK_SAMPLES = 1 << 16


@dataclass(frozen=True)
class OracleEstimate:
    """A Monte-Carlo estimate together with its sample count and seed."""

    value: Union[float, np.ndarray]
    n_samples: int
    seed: int


def _check_point(h: np.ndarray, design) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (design.d + 1,):
        raise ValueError(f"parameter has shape {h.shape}, expected ({design.d + 1},)")
    return h


def _chunks(n_samples: int):
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    full, rest = divmod(n_samples, CHUNK_SAMPLES)
    sizes = [CHUNK_SAMPLES] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _accumulate(fn, design, n_samples, seed, workers):
    """Apply ``fn(X)`` to every chunk and add the results in chunk order."""

    def one(arg):
        idx, size = arg
        x = design.sample(keyed_rng(seed, DOMAIN_ORACLE, idx), size)
        return fn(x)

    chunks = _chunks(n_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, chunks))
    else:
        parts = [one(c) for c in chunks]
    total = parts[0]
    for part in parts[1:]:
        total = [t + p for t, p in zip(total, part)]
    return total


def mc_objective(h, theta_true, design, n_samples: int, seed: int, workers: int = 1) -> OracleEstimate:
    """Population negative log-likelihood at ``h`` under the model
    ``theta_true``: the mean of softplus(h.phi) - (h.phi) pi(theta.phi)."""
    h = _check_point(h, design)
    theta_true = _check_point(theta_true, design)

    def term(x):
        t_h = h[0] + x @ h[1:]
        t_true = theta_true[0] + x @ theta_true[1:]
        softplus = np.maximum(t_h, 0.0) + np.log1p(np.exp(-np.abs(t_h)))
        return [np.sum(softplus - t_h * sigmoid(t_true))]

    (total,) = _accumulate(term, design, n_samples, seed, workers)
    return OracleEstimate(value=float(total / n_samples), n_samples=n_samples, seed=seed)


def mc_gradient(h, theta_true, design, n_samples: int, seed: int, workers: int = 1) -> OracleEstimate:
    """Gradient of the population objective at ``h``: the mean of
    phi (pi(h.phi) - pi(theta.phi)). Exactly zero at h = theta_true."""
    h = _check_point(h, design)
    theta_true = _check_point(theta_true, design)

    def term(x):
        diff = sigmoid(h[0] + x @ h[1:]) - sigmoid(theta_true[0] + x @ theta_true[1:])
        return [np.sum(diff), x.T @ diff]

    g0, gx = _accumulate(term, design, n_samples, seed, workers)
    grad = np.concatenate([[g0], gx]) / n_samples
    return OracleEstimate(value=grad, n_samples=n_samples, seed=seed)


def mc_hessian(h, design, n_samples: int, seed: int, workers: int = 1) -> OracleEstimate:
    """Hessian of the population objective at ``h``: the mean of
    ``bernoulli_weight(h.phi) * phi phi^T``, symmetrized."""
    h = _check_point(h, design)

    def term(x):
        w = bernoulli_weight(h[0] + x @ h[1:])
        return [np.sum(w), x.T @ w, x.T @ (x * w[:, None])]

    s00, s0x, sxx = _accumulate(term, design, n_samples, seed, workers)
    p = design.d + 1
    hess = np.empty((p, p))
    hess[0, 0] = s00
    hess[0, 1:] = s0x
    hess[1:, 0] = s0x
    hess[1:, 1:] = sxx
    hess /= n_samples
    hess = 0.5 * (hess + hess.T)
    return OracleEstimate(value=hess, n_samples=n_samples, seed=seed)


def hessian_eigen_table(theta, design, n_samples: int, seed: int, workers: int = 1) -> np.ndarray:
    """Eigenvalues of the estimated Hessian at ``theta``, sorted descending."""
    est = mc_hessian(theta, design, n_samples, seed, workers=workers)
    w = np.linalg.eigvalsh(est.value)
    return w[::-1].copy()
