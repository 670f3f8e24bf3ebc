"""Logistic link functions and per-sample loss/gradient for binary regression.

Everything here is a pure function of its inputs. Covariate vectors are
"augmented": the first coordinate is the intercept and is always exactly 1.
Labels are stored as 0/1 floats; the -1/+1 convention is handled at
ingestion time (see :mod:`streamlogit.simulate`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Observation",
    "sigmoid",
    "bernoulli_weight",
    "alpha_weight",
    "per_sample_gradient",
    "per_sample_loss",
]


@dataclass(frozen=True)
class Observation:
    """One labeled sample: augmented covariate vector ``phi`` and label ``y``.

    ``phi[0]`` must be exactly 1 (the intercept coordinate) and ``y`` must be
    0 or 1. Construction validates both.
    """

    phi: np.ndarray
    y: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "y", float(self.y))
        if phi.ndim != 1 or phi.size == 0:
            raise ValueError("phi must be a nonempty 1-d vector")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi has non-finite coordinates")
        if phi[0] != 1.0:
            raise ValueError(f"phi[0] must be exactly 1, got {phi[0]!r}")
        if self.y not in (0.0, 1.0):
            raise ValueError(f"label must be 0 or 1, got {self.y!r}")

    @property
    def dim(self) -> int:
        return self.phi.size


def sigmoid(x):
    """Logistic link exp(x)/(1+exp(x)), stable for any finite input.

    Accepts scalars or arrays. Branching on the sign keeps the argument of
    exp nonpositive, so there is no overflow even for |x| ~ 700: the value
    is exp(x)/(1+exp(x)) for x <= 0 and 1/(1+exp(-x)) for x > 0.
    """
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    out = np.where(x > 0, 1.0 / (1.0 + e), e / (1.0 + e))
    if out.ndim == 0:
        return float(out)
    return out


def bernoulli_weight(x):
    """Curvature weight pi(x)(1-pi(x)) = 1/(4 cosh(x/2)^2).

    Evaluated as exp(-|x|)/(1+exp(-|x|))^2, which is the cosh form rewritten
    so it is even in x bit-for-bit and never overflows. The maximum is 1/4
    at the origin.
    """
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    out = e / np.square(1.0 + e)
    if out.ndim == 0:
        return float(out)
    return out


def _check_dims(h: np.ndarray, phi: np.ndarray) -> None:
    if h.shape != phi.shape:
        raise ValueError(f"dimension mismatch: h has shape {h.shape}, phi has shape {phi.shape}")


def alpha_weight(h: np.ndarray, phi: np.ndarray) -> float:
    """Curvature weight of a sample: ``bernoulli_weight(h . phi)``."""
    h = np.asarray(h, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    _check_dims(h, phi)
    return bernoulli_weight(float(h @ phi))


def per_sample_gradient(h: np.ndarray, obs: Observation) -> np.ndarray:
    """Gradient of the per-sample negative log-likelihood at h.

    Equals ``phi * (pi(h . phi) - y)``; its norm is bounded by ``|phi|``.
    """
    h = np.asarray(h, dtype=np.float64)
    _check_dims(h, obs.phi)
    return obs.phi * (sigmoid(float(h @ obs.phi)) - obs.y)


def per_sample_loss(h: np.ndarray, obs: Observation) -> float:
    """Per-sample negative log-likelihood log(1+exp(h.phi)) - (h.phi) y.

    Uses log1p branching on the sign of the margin, so large |h . phi|
    neither overflows nor loses the small positive tail.
    """
    h = np.asarray(h, dtype=np.float64)
    _check_dims(h, obs.phi)
    t = float(h @ obs.phi)
    # log(1+exp(t)) = max(t, 0) + log1p(exp(-|t|))
    softplus = max(t, 0.0) + np.log1p(np.exp(-abs(t)))
    return softplus - t * obs.y
