"""Pure-Python update loops: the fallback twin of the compiled kernels.

Same contract as ``streamlogit._kernels``: each ``run_*`` folds a block of
observations into the state buffers in place and returns 0, or the 1-based
global index of the first step at which the state went non-finite. ``trace``
(when given) receives the squared distance of the reported estimate from
``theta_ref`` after every step.
"""

from __future__ import annotations

import functools
import math

import numpy as np

BACKEND = "python"


def _quiet(fn):
    # divergence is detected by letting overflow reach the finite guard;
    # keep the fallback as silent about it as the compiled twin
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kwargs)

    return wrapper


def _sigmoid(t: float) -> float:
    if t > 0.0:
        e = math.exp(-t)
        return 1.0 / (1.0 + e)
    e = math.exp(t)
    return e / (1.0 + e)


def _bernoulli_weight(t: float) -> float:
    e = math.exp(-abs(t))
    s = 1.0 + e
    return e / (s * s)


def _state_ok(theta: np.ndarray, s_inv: np.ndarray | None) -> bool:
    if not np.all(np.isfinite(theta)):
        return False
    if s_inv is not None and not np.all(np.isfinite(np.diagonal(s_inv))):
        return False
    return True


def _record(trace, theta_ref, i, estimate) -> None:
    if trace is not None:
        d = estimate - theta_ref
        trace[i] = float(d @ d)


@_quiet
def run_tsn(theta, s_inv, phi, y, n_start, c_alpha, beta, trace=None, theta_ref=None):
    m = phi.shape[0]
    for i in range(m):
        k = n_start + i + 1
        row = phi[i]
        t = float(theta @ row)
        a_hat = _bernoulli_weight(t)
        resid = y[i] - _sigmoid(t)
        m_phi = s_inv @ row
        q = float(row @ m_phi)
        # parameter moves with the inverse from the previous step
        theta += m_phi * resid
        alpha = max(a_hat, c_alpha * k ** (-beta))
        s_inv -= (alpha / (1.0 + alpha * q)) * np.outer(m_phi, m_phi)
        s_inv[:] = 0.5 * (s_inv + s_inv.T)
        if not _state_ok(theta, s_inv):
            return k
        _record(trace, theta_ref, i, theta)
    return 0


@_quiet
def run_sn(theta, s_inv, phi, y, n_start, trace=None, theta_ref=None):
    m = phi.shape[0]
    for i in range(m):
        row = phi[i]
        t = float(theta @ row)
        a = _bernoulli_weight(t)
        resid = y[i] - _sigmoid(t)
        m_phi = s_inv @ row
        q = float(row @ m_phi)
        denom = 1.0 + a * q
        # inverse first, then the parameter moves with the updated inverse;
        # S_new^{-1} phi equals m_phi / denom
        s_inv -= (a / denom) * np.outer(m_phi, m_phi)
        s_inv[:] = 0.5 * (s_inv + s_inv.T)
        theta += m_phi * (resid / denom)
        if not _state_ok(theta, s_inv):
            return n_start + i + 1
        _record(trace, theta_ref, i, theta)
    return 0


@_quiet
def run_rls(theta, s_inv, phi, y, n_start, trace=None, theta_ref=None):
    m = phi.shape[0]
    for i in range(m):
        row = phi[i]
        resid = y[i] - float(theta @ row)
        m_phi = s_inv @ row
        q = float(row @ m_phi)
        denom = 1.0 + q
        s_inv -= (1.0 / denom) * np.outer(m_phi, m_phi)
        s_inv[:] = 0.5 * (s_inv + s_inv.T)
        theta += m_phi * (resid / denom)
        if not _state_ok(theta, s_inv):
            return n_start + i + 1
        _record(trace, theta_ref, i, theta)
    return 0


@_quiet
def run_sgd(theta, phi, y, n_start, c_gamma, exponent, trace=None, theta_ref=None):
    m = phi.shape[0]
    for i in range(m):
        k = n_start + i + 1
        row = phi[i]
        resid = y[i] - _sigmoid(float(theta @ row))
        theta += (c_gamma * k ** (-exponent) * resid) * row
        if not _state_ok(theta, None):
            return k
        _record(trace, theta_ref, i, theta)
    return 0


@_quiet
def run_asgd(theta, theta_bar, phi, y, n_start, c_gamma, exponent, trace=None, theta_ref=None):
    m = phi.shape[0]
    for i in range(m):
        k = n_start + i + 1
        row = phi[i]
        resid = y[i] - _sigmoid(float(theta @ row))
        theta += (c_gamma * k ** (-exponent) * resid) * row
        theta_bar += (theta - theta_bar) / k
        if not (_state_ok(theta, None) and _state_ok(theta_bar, None)):
            return k
        _record(trace, theta_ref, i, theta_bar)
    return 0
