# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled update loops for the recursive estimators.

Twin of ``streamlogit._kernels_py``: identical signatures and semantics,
with the per-observation recursions written as C loops that release the
GIL. See the fallback module for the contract.
"""

from libc.math cimport exp, fabs, isfinite, pow

import numpy as np

BACKEND = "compiled"


cdef inline double _sigmoid(double t) nogil:
    cdef double e
    if t > 0.0:
        e = exp(-t)
        return 1.0 / (1.0 + e)
    e = exp(t)
    return e / (1.0 + e)


cdef inline double _bernoulli_weight(double t) nogil:
    cdef double e = exp(-fabs(t))
    cdef double s = 1.0 + e
    return e / (s * s)


cdef inline double _dot_row(double[::1] v, double[:, ::1] mat, Py_ssize_t i) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t j
    for j in range(v.shape[0]):
        acc += v[j] * mat[i, j]
    return acc


cdef inline double _solve_row(double[:, ::1] s_inv, double[:, ::1] phi,
                              Py_ssize_t i, double[::1] m_phi) nogil:
    # m_phi = S^{-1} phi_i, returns q = phi_i . m_phi
    cdef Py_ssize_t p = m_phi.shape[0]
    cdef Py_ssize_t j, l
    cdef double acc, q = 0.0
    for j in range(p):
        acc = 0.0
        for l in range(p):
            acc += s_inv[j, l] * phi[i, l]
        m_phi[j] = acc
        q += acc * phi[i, j]
    return q


cdef inline void _downdate(double[:, ::1] s_inv, double[::1] m_phi, double c) nogil:
    # s_inv -= c * m_phi m_phi^T, mirrored so symmetry is exact
    cdef Py_ssize_t p = m_phi.shape[0]
    cdef Py_ssize_t j, l
    cdef double v
    for j in range(p):
        for l in range(j, p):
            v = s_inv[j, l] - c * m_phi[j] * m_phi[l]
            s_inv[j, l] = v
            s_inv[l, j] = v


cdef inline bint _state_ok(double[::1] theta, double[:, ::1] s_inv) nogil:
    cdef Py_ssize_t j
    for j in range(theta.shape[0]):
        if not isfinite(theta[j]):
            return 0
    if s_inv is not None:
        for j in range(s_inv.shape[0]):
            if not isfinite(s_inv[j, j]):
                return 0
    return 1


cdef inline void _record(double[::1] trace, double[::1] theta_ref,
                         Py_ssize_t i, double[::1] estimate) nogil:
    cdef double acc = 0.0, d
    cdef Py_ssize_t j
    if trace is not None:
        for j in range(estimate.shape[0]):
            d = estimate[j] - theta_ref[j]
            acc += d * d
        trace[i] = acc


def run_tsn(double[::1] theta, double[:, ::1] s_inv,
            double[:, ::1] phi, double[::1] y,
            long n_start, double c_alpha, double beta,
            double[::1] trace=None, double[::1] theta_ref=None):
    cdef Py_ssize_t m = phi.shape[0]
    cdef Py_ssize_t p = theta.shape[0]
    cdef double[::1] m_phi = np.empty(p)
    cdef Py_ssize_t i, j
    cdef long k, bad = 0
    cdef double t, a_hat, resid, q, alpha, floor_
    with nogil:
        for i in range(m):
            k = n_start + i + 1
            t = _dot_row(theta, phi, i)
            a_hat = _bernoulli_weight(t)
            resid = y[i] - _sigmoid(t)
            q = _solve_row(s_inv, phi, i, m_phi)
            for j in range(p):
                theta[j] += m_phi[j] * resid
            floor_ = c_alpha * pow(k, -beta)
            alpha = a_hat if a_hat > floor_ else floor_
            _downdate(s_inv, m_phi, alpha / (1.0 + alpha * q))
            if not _state_ok(theta, s_inv):
                bad = k
                break
            _record(trace, theta_ref, i, theta)
    return bad


def run_sn(double[::1] theta, double[:, ::1] s_inv,
           double[:, ::1] phi, double[::1] y, long n_start,
           double[::1] trace=None, double[::1] theta_ref=None):
    cdef Py_ssize_t m = phi.shape[0]
    cdef Py_ssize_t p = theta.shape[0]
    cdef double[::1] m_phi = np.empty(p)
    cdef Py_ssize_t i, j
    cdef long bad = 0
    cdef double t, a, resid, q, denom
    with nogil:
        for i in range(m):
            t = _dot_row(theta, phi, i)
            a = _bernoulli_weight(t)
            resid = y[i] - _sigmoid(t)
            q = _solve_row(s_inv, phi, i, m_phi)
            denom = 1.0 + a * q
            _downdate(s_inv, m_phi, a / denom)
            for j in range(p):
                theta[j] += m_phi[j] * (resid / denom)
            if not _state_ok(theta, s_inv):
                bad = n_start + i + 1
                break
            _record(trace, theta_ref, i, theta)
    return bad


def run_rls(double[::1] theta, double[:, ::1] s_inv,
            double[:, ::1] phi, double[::1] y, long n_start,
            double[::1] trace=None, double[::1] theta_ref=None):
    cdef Py_ssize_t m = phi.shape[0]
    cdef Py_ssize_t p = theta.shape[0]
    cdef double[::1] m_phi = np.empty(p)
    cdef Py_ssize_t i, j
    cdef long bad = 0
    cdef double resid, q, denom
    with nogil:
        for i in range(m):
            resid = y[i] - _dot_row(theta, phi, i)
            q = _solve_row(s_inv, phi, i, m_phi)
            denom = 1.0 + q
            _downdate(s_inv, m_phi, 1.0 / denom)
            for j in range(p):
                theta[j] += m_phi[j] * (resid / denom)
            if not _state_ok(theta, s_inv):
                bad = n_start + i + 1
                break
            _record(trace, theta_ref, i, theta)
    return bad


def run_sgd(double[::1] theta, double[:, ::1] phi, double[::1] y,
            long n_start, double c_gamma, double exponent,
            double[::1] trace=None, double[::1] theta_ref=None):
    cdef Py_ssize_t m = phi.shape[0]
    cdef Py_ssize_t p = theta.shape[0]
    cdef Py_ssize_t i, j
    cdef long k, bad = 0
    cdef double coef
    with nogil:
        for i in range(m):
            k = n_start + i + 1
            coef = c_gamma * pow(k, -exponent) * (y[i] - _sigmoid(_dot_row(theta, phi, i)))
            for j in range(p):
                theta[j] += coef * phi[i, j]
            if not _state_ok(theta, None):
                bad = k
                break
            _record(trace, theta_ref, i, theta)
    return bad


def run_asgd(double[::1] theta, double[::1] theta_bar,
             double[:, ::1] phi, double[::1] y,
             long n_start, double c_gamma, double exponent,
             double[::1] trace=None, double[::1] theta_ref=None):
    cdef Py_ssize_t m = phi.shape[0]
    cdef Py_ssize_t p = theta.shape[0]
    cdef Py_ssize_t i, j
    cdef long k, bad = 0
    cdef double coef
    with nogil:
        for i in range(m):
            k = n_start + i + 1
            coef = c_gamma * pow(k, -exponent) * (y[i] - _sigmoid(_dot_row(theta, phi, i)))
            for j in range(p):
                theta[j] += coef * phi[i, j]
                theta_bar[j] += (theta[j] - theta_bar[j]) / k
            if not (_state_ok(theta, None) and _state_ok(theta_bar, None)):
                bad = k
                break
            _record(trace, theta_ref, i, theta_bar)
    return bad
