"""Rank-one maintenance of the inverse of a growing SPD accumulator.

The accumulator S starts at the identity and grows by nonnegative-weighted
outer products ``a * phi phi^T``. Only its inverse is stored; each update
applies the Sherman-Morrison closed form, so no matrix is ever inverted in
the streaming path. ``direct_inverse`` exists as the dense oracle that the
recursive path is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InverseAccumulator",
    "rank_one_update",
    "direct_inverse",
    "extreme_eigenvalues",
]

_SYM_RTOL = 1e-10


@dataclass
class InverseAccumulator:
    """Inverse of an SPD accumulator, kept current through rank-one updates.

    ``inv`` is the stored inverse (symmetric positive definite);
    ``n_updates`` counts the rank-one updates applied so far.
    """

    inv: np.ndarray
    n_updates: int = 0

    @classmethod
    def identity(cls, dim: int) -> "InverseAccumulator":
        return cls(inv=np.eye(dim), n_updates=0)

    @property
    def dim(self) -> int:
        return self.inv.shape[0]

    def copy(self) -> "InverseAccumulator":
        return InverseAccumulator(inv=self.inv.copy(), n_updates=self.n_updates)


def _require_symmetric(m: np.ndarray, rtol: float = _SYM_RTOL) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.linalg.norm(m), 1.0)
    if np.linalg.norm(m - m.T) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return m


def rank_one_update(acc: InverseAccumulator, a: float, phi: np.ndarray) -> InverseAccumulator:
    """Inverse of ``S + a * phi phi^T`` given the inverse of S.

    Applies M - a/(1 + a phi^T M phi) * (M phi)(M phi)^T with M the stored
    inverse, then re-symmetrizes; one update costs O(dim^2).
    """
    phi = np.asarray(phi, dtype=np.float64)
    if a < 0:
        raise ValueError(f"update weight must be nonnegative, got {a}")
    if phi.shape != (acc.dim,):
        raise ValueError(f"dimension mismatch: accumulator is {acc.dim}-dim, phi has shape {phi.shape}")
    m_phi = acc.inv @ phi
    denom = 1.0 + a * float(phi @ m_phi)
    new = acc.inv - (a / denom) * np.outer(m_phi, m_phi)
    new = 0.5 * (new + new.T)
    return InverseAccumulator(inv=new, n_updates=acc.n_updates + 1)


def direct_inverse(m: np.ndarray) -> np.ndarray:
    """Dense inverse of a symmetric positive definite matrix.

    Cholesky-based; raises on inputs that are not symmetric or not PD.
    Used as the test oracle for the recursive updates.
    """
    m = _require_symmetric(m)
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    ident = np.eye(m.shape[0])
    # solve L L^T X = I by two triangular solves
    tmp = np.linalg.solve(chol, ident)
    inv = np.linalg.solve(chol.T, tmp)
    return 0.5 * (inv + inv.T)


def extreme_eigenvalues(m: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalues of a symmetric matrix."""
    m = _require_symmetric(m, rtol=1e-8)
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    return float(w[0]), float(w[-1])
