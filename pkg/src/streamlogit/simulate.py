"""Data generation, CSV ingestion and label recoding.

The on-disk row format is ``y,x1,...,xd`` with the label first. The
intercept coordinate is never stored; loaders prepend it, so a file can
never carry a doubled intercept.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from ._rng import DOMAIN_DATA, keyed_rng
from .model import Observation, sigmoid

__all__ = [
    "DesignSpec",
    "reference_theta",
    "gen_observation",
    "gen_observations",
    "recode_labels",
    "stream_from_file",
    "write_observations_csv",
    "replication_rng",
]

_LAWS = ("uniform01",)

# Coefficients of the standard hard benchmark model: d = 10 uniform
# covariates and a Hessian whose eigenvalues span three orders of magnitude.
_REFERENCE_THETA = (-9.0, 0.0, 3.0, -9.0, 4.0, -9.0, 15.0, 0.0, -7.0, 1.0, 0.0)


@dataclass(frozen=True)
class DesignSpec:
    """Covariate law: ``d`` iid coordinates, currently uniform on [0, 1]."""

    d: int
    law: str = "uniform01"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.law not in _LAWS:
            raise ValueError(f"unknown covariate law {self.law!r}; choices: {_LAWS}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random((size, self.d))


def reference_theta() -> np.ndarray:
    """Coefficient vector of the built-in hard benchmark model (length 11)."""
    return np.array(_REFERENCE_THETA)


def replication_rng(master_seed: int, replication: int) -> np.random.Generator:
    """Independent per-replication stream derived from the master seed."""
    return keyed_rng(master_seed, DOMAIN_DATA, replication)


def _check_theta(theta, design: DesignSpec) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (design.d + 1,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({design.d + 1},)")
    return theta


def gen_observation(theta, design: DesignSpec, rng: np.random.Generator) -> Observation:
    """Draw covariates from the design and a label from the logistic model.

    Consumes exactly ``d + 1`` uniforms per call (covariates then the label
    threshold), the same layout :func:`gen_observations` uses row by row, so
    the two produce identical sequences from the same stream.
    """
    theta = _check_theta(theta, design)
    u = rng.random(design.d + 1)
    x = u[: design.d]
    prob = sigmoid(theta[0] + float(x @ theta[1:]))
    y = 1.0 if u[design.d] < prob else 0.0
    return Observation(phi=np.concatenate([[1.0], x]), y=y)


def gen_observations(theta, design: DesignSpec, n: int, rng: np.random.Generator):
    """Vectorized batch of n observations: arrays ``(phi, y)``.

    ``phi`` has shape (n, d+1) with the intercept prepended; ``y`` is 0/1.
    """
    theta = _check_theta(theta, design)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    u = rng.random((n, design.d + 1))
    x = u[:, : design.d]
    prob = sigmoid(theta[0] + x @ theta[1:])
    y = (u[:, design.d] < prob).astype(np.float64)
    phi = np.concatenate([np.ones((n, 1)), x], axis=1)
    return phi, y


def recode_labels(pairs: Iterable, *, first_line: int = 1) -> Iterator[tuple[np.ndarray, float]]:
    """Map -1/+1 labels to 0/1, leaving covariates untouched.

    Takes ``(phi, y)`` pairs and yields them in order; any label outside
    {-1, 1} raises a ValueError naming the offending line.
    """
    for offset, (phi, y) in enumerate(pairs):
        line = first_line + offset
        if y == -1.0:
            yield phi, 0.0
        elif y == 1.0:
            yield phi, 1.0
        else:
            raise ValueError(f"line {line}: label {y!r} is not in {{-1, 1}}")


def _raw_rows(path, has_header: bool) -> Iterator[tuple[int, np.ndarray, float]]:
    expected: Optional[int] = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if lineno == 1 and has_header:
                continue
            if expected is None:
                expected = len(fields)
                if expected < 2:
                    raise ValueError(f"{path}:{lineno}: expected at least 2 fields, got {len(fields)}")
            elif len(fields) != expected:
                raise ValueError(f"{path}:{lineno}: expected {expected} fields, got {len(fields)}")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: could not parse row as numbers") from None
            phi = np.concatenate([[1.0], values[1:]])
            yield lineno, phi, values[0]


def stream_from_file(path, has_header: bool = True, labels: str = "01") -> Iterator[Observation]:
    """Stream observations from a CSV file, one at a time (constant memory).

    ``labels="rademacher"`` accepts -1/+1 labels and recodes them; the
    default requires 0/1. Parse failures, arity changes and out-of-range
    labels raise a ValueError naming the file and line.
    """
    if labels not in ("01", "rademacher"):
        raise ValueError(f"labels must be '01' or 'rademacher', got {labels!r}")
    rows = _raw_rows(path, has_header)
    first_line = 2 if has_header else 1
    if labels == "rademacher":
        pairs = recode_labels(((phi, y) for _, phi, y in rows), first_line=first_line)
    else:
        def _checked():
            for lineno, phi, y in rows:
                if y not in (0.0, 1.0):
                    raise ValueError(f"{path}:{lineno}: label {y!r} is not in {{0, 1}}")
                yield phi, y

        pairs = _checked()
    for offset, (phi, y) in enumerate(pairs):
        try:
            yield Observation(phi=phi, y=y)
        except ValueError as exc:
            raise ValueError(f"{path}:{first_line + offset}: {exc}") from None


def write_observations_csv(path, phi: np.ndarray, y: np.ndarray, labels: str = "01") -> None:
    """Write observations as ``y,x1,...,xd`` rows (intercept dropped)."""
    phi = np.asarray(phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if labels not in ("01", "rademacher"):
        raise ValueError(f"labels must be '01' or 'rademacher', got {labels!r}")
    d = phi.shape[1] - 1
    out = y if labels == "01" else 2.0 * y - 1.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j}" for j in range(1, d + 1)])
        for i in range(phi.shape[0]):
            writer.writerow([str(int(out[i]))] + [repr(float(v)) for v in phi[i, 1:]])
