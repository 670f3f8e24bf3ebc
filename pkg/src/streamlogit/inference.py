"""Wald-type inference from a fitted Newton-type estimator state.

The accumulator divided by the step count estimates the curvature of the
population objective, so the quadratic form of the estimation error in the
accumulator metric is asymptotically chi-square with dim degrees of
freedom, and any fixed contrast is asymptotically standard normal after
studentizing by the stored inverse. Quantile routines for both reference
laws are implemented here; the package takes no statistical runtime
dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "InferenceReport",
    "normal_quantile",
    "chisq_quantile",
    "chisq_survival",
    "chisq_statistic",
    "contrast_z",
    "coordinate_interval",
    "region_report",
    "coordinate_report",
    "contrast_report",
]


@dataclass(frozen=True)
class InferenceReport:
    """One test summary: statistic, reference law, p-value, optional interval."""

    statistic: float
    law: str
    p_value: float
    level: float
    interval: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of range: {self.p_value}")
        if self.interval is not None and self.interval[0] > self.interval[1]:
            raise ValueError(f"inverted interval: {self.interval}")


# Rational approximation of the standard normal quantile (Acklam), then one
# Halley refinement against erfc to push the error to machine precision.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Quantile of the standard normal law, accurate to ~1e-15."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Halley step on 0.5 erfc(-x/sqrt(2)) = p
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    refined = x - u / (1.0 + 0.5 * x * u)
    return refined if math.isfinite(refined) else x


def _reg_gamma_pq(a: float, x: float) -> tuple[float, float]:
    """Regularized incomplete gamma pair (P, Q) = (lower, upper) at (a, x)."""
    if x < 0.0 or a <= 0.0:
        raise ValueError(f"invalid incomplete gamma arguments a={a}, x={x}")
    if x == 0.0:
        return 0.0, 1.0
    log_scale = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # series for P
        ap = a
        total = 1.0 / a
        delta = total
        for _ in range(10000):
            ap += 1.0
            delta *= x / ap
            total += delta
            if abs(delta) < abs(total) * 1e-17:
                break
        p = total * math.exp(log_scale)
        return min(p, 1.0), max(1.0 - p, 0.0)
    # continued fraction for Q (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        factor = d * c
        h *= factor
        if abs(factor - 1.0) < 1e-17:
            break
    q = h * math.exp(log_scale)
    return max(1.0 - q, 0.0), min(q, 1.0)


def chisq_survival(x: float, dof: int) -> float:
    """Upper tail probability of the chi-square law with ``dof`` degrees."""
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if x <= 0.0:
        return 1.0
    return _reg_gamma_pq(0.5 * dof, 0.5 * x)[1]


def chisq_quantile(dof: int, p: float) -> float:
    """Quantile of the chi-square law, via incomplete gamma inversion.

    Safeguarded Newton iteration from a Wilson-Hilferty start; relative
    accuracy well below 1e-8 across the tested range.
    """
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    a = 0.5 * dof
    z = normal_quantile(p)
    t = 1.0 - 2.0 / (9.0 * dof) + z * math.sqrt(2.0 / (9.0 * dof))
    x = dof * t * t * t if t > 0 else 0.5 * dof * math.exp(z)
    lo, hi = 0.0, max(x, float(dof))
    while _reg_gamma_pq(a, 0.5 * hi)[0] < p:
        lo = hi
        hi *= 2.0
    x = min(max(x, lo + 1e-12 * (hi - lo)), hi)
    for _ in range(200):
        pv = _reg_gamma_pq(a, 0.5 * x)[0]
        if pv > p:
            hi = x
        else:
            lo = x
        log_pdf = (a - 1.0) * math.log(0.5 * x) - 0.5 * x - math.lgamma(a) - math.log(2.0)
        step = (pv - p) * math.exp(-log_pdf) if log_pdf > -700 else math.inf
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 1e-14 * max(abs(x), 1e-300):
            return nxt
        x = nxt
    return x


def _require_accumulator(state):
    if getattr(state, "acc", None) is None:
        raise ValueError(f"algorithm {state.algorithm!r} carries no curvature accumulator")
    return state.acc.inv


def chisq_statistic(state, theta0) -> float:
    """Quadratic form of (theta_hat - theta0) in the accumulator metric.

    Computed by one dense solve against the stored inverse; the accumulator
    itself is never re-materialized.
    """
    inv = _require_accumulator(state)
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != state.theta.shape:
        raise ValueError(f"theta0 has shape {theta0.shape}, expected {state.theta.shape}")
    v = state.theta - theta0
    return float(v @ np.linalg.solve(inv, v))


def contrast_z(state, theta0, w) -> float:
    """Studentized contrast w.(theta_hat - theta0) / sqrt(w. inv w)."""
    inv = _require_accumulator(state)
    theta0 = np.asarray(theta0, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != state.theta.shape or theta0.shape != state.theta.shape:
        raise ValueError("contrast/theta0 dimensions do not match the state")
    if not np.any(w != 0.0):
        raise ValueError("contrast vector must be nonzero")
    return float(w @ (state.theta - theta0)) / math.sqrt(float(w @ inv @ w))


def coordinate_interval(state, k: int, level: float) -> tuple[float, float]:
    """Confidence interval for coordinate ``k`` at the given level."""
    inv = _require_accumulator(state)
    if not 0 <= k < state.theta.size:
        raise IndexError(f"coordinate {k} out of range for a {state.theta.size}-dim state")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    half = normal_quantile(0.5 * (1.0 + level)) * math.sqrt(inv[k, k])
    center = float(state.theta[k])
    return center - half, center + half


def region_report(state, theta0, level: float = 0.95) -> InferenceReport:
    """Chi-square test of theta = theta0 using the full quadratic form."""
    stat = chisq_statistic(state, theta0)
    dof = state.theta.size
    return InferenceReport(
        statistic=stat, law=f"chi2({dof})", p_value=chisq_survival(stat, dof), level=level
    )


def coordinate_report(state, k: int, level: float = 0.95, null_value: float = 0.0) -> InferenceReport:
    """z-test of theta_k = null_value, with the matching interval."""
    inv = _require_accumulator(state)
    if not 0 <= k < state.theta.size:
        raise IndexError(f"coordinate {k} out of range for a {state.theta.size}-dim state")
    z = (float(state.theta[k]) - null_value) / math.sqrt(inv[k, k])
    return InferenceReport(
        statistic=z,
        law="normal",
        p_value=math.erfc(abs(z) / math.sqrt(2.0)),
        level=level,
        interval=coordinate_interval(state, k, level),
    )


def contrast_report(state, w, theta0=None, level: float = 0.95) -> InferenceReport:
    """z-test of w.theta = w.theta0 (theta0 defaults to zero)."""
    if theta0 is None:
        theta0 = np.zeros_like(state.theta)
    z = contrast_z(state, theta0, w)
    inv = state.acc.inv
    w = np.asarray(w, dtype=np.float64)
    half = normal_quantile(0.5 * (1.0 + level)) * math.sqrt(float(w @ inv @ w))
    center = float(w @ state.theta)
    return InferenceReport(
        statistic=z,
        law="normal",
        p_value=math.erfc(abs(z) / math.sqrt(2.0)),
        level=level,
        interval=(center - half, center + half),
    )
