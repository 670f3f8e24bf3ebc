"""Seeded replication harness: MSE curves, step tuning and summaries.

Every replication draws its own Philox stream from the master seed, picks a
starting point uniformly in a box around the true parameter, generates one
data stream, and runs every configured algorithm on that same stream from
that same starting point. Records are keyed by (algorithm, replication) and
canonicalized by sorting, so results do not depend on scheduling; runs that
go non-finite are kept and flagged rather than dropped.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._rng import DOMAIN_TUNING, keyed_rng
from .estimators import ALGORITHMS, DivergenceError, StepSchedule, TruncationConfig, fit_stream
from .simulate import DesignSpec, gen_observations, replication_rng

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "SummaryStats",
    "default_checkpoints",
    "default_sgd_grid",
    "run_benchmark",
    "tune_sgd_step",
    "summarize",
    "mean_curve",
    "loglog_slope",
    "write_records_csv",
    "write_summary_csv",
]


def default_checkpoints(n_iterations: int, points: int = 20) -> tuple[int, ...]:
    """Geometric grid of recording points from 10 (or less) up to n."""
    if n_iterations < 1:
        raise ValueError(f"n_iterations must be >= 1, got {n_iterations}")
    lo = min(10, n_iterations)
    grid = np.geomspace(lo, n_iterations, points)
    return tuple(np.unique(np.rint(grid).astype(int)))


def default_sgd_grid() -> tuple[tuple[float, float], ...]:
    """12-point (c_gamma, exponent) grid used to tune the gradient step."""
    return tuple((c, a) for c in (0.5, 1.0, 2.0, 4.0) for a in (0.51, 0.75, 1.0))


@dataclass
class BenchConfig:
    theta: np.ndarray
    design: DesignSpec
    algorithms: tuple[str, ...] = ("tsn", "sn", "sgd", "asgd")
    n_replications: int = 100
    n_iterations: int = 5000
    checkpoints: Optional[tuple[int, ...]] = None
    master_seed: int = 0
    init_halfwidth: float = 1.0
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    step: StepSchedule = field(default_factory=StepSchedule)
    workers: int = 1

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.n_replications < 1 or self.n_iterations < 1:
            raise ValueError("n_replications and n_iterations must be >= 1")
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.n_iterations)
        self.checkpoints = tuple(int(c) for c in self.checkpoints)
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        if self.checkpoints[0] < 1 or self.checkpoints[-1] > self.n_iterations:
            raise ValueError("checkpoints must lie in [1, n_iterations]")


@dataclass
class BenchRecord:
    """Squared-error trace of one (algorithm, replication) run at checkpoints."""

    algorithm: str
    replication: int
    ns: np.ndarray
    sq_errors: np.ndarray
    diverged_at: Optional[int] = None

    @property
    def checkpoints(self) -> list[tuple[int, float]]:
        return list(zip(self.ns.tolist(), self.sq_errors.tolist()))

    def error_at(self, n: int) -> float:
        idx = np.searchsorted(self.ns, n)
        if idx >= self.ns.size or self.ns[idx] != n:
            raise ValueError(f"record {self.algorithm}/{self.replication} has no checkpoint at n={n}")
        return float(self.sq_errors[idx])


def _algo_config(config: BenchConfig, algorithm: str):
    if algorithm == "tsn":
        return config.truncation
    if algorithm in ("sgd", "asgd"):
        return config.step
    return None


def _one_replication(config: BenchConfig, replication: int) -> list[BenchRecord]:
    rng = replication_rng(config.master_seed, replication)
    theta0 = config.theta + rng.uniform(
        -config.init_halfwidth, config.init_halfwidth, config.theta.size
    )
    phi, y = gen_observations(config.theta, config.design, config.n_iterations, rng)
    ckpts = np.asarray(config.checkpoints)
    records = []
    for algorithm in config.algorithms:
        try:
            result = fit_stream(
                algorithm,
                (phi, y),
                config=_algo_config(config, algorithm),
                theta0=theta0.copy(),
                theta_ref=config.theta,
            )
            trace, diverged_at = result.trace, None
        except DivergenceError as exc:
            trace = exc.trace if exc.trace is not None else np.empty(0)
            diverged_at = exc.step
        keep = ckpts[ckpts <= trace.size]
        records.append(
            BenchRecord(
                algorithm=algorithm,
                replication=replication,
                ns=keep,
                sq_errors=trace[keep - 1],
                diverged_at=diverged_at,
            )
        )
    return records


def run_benchmark(config: BenchConfig, progress=None) -> list[BenchRecord]:
    """All (algorithm, replication) records, sorted for canonical output.

    ``progress`` (optional) is called as ``progress(done, total)`` after
    each finished replication.
    """
    reps = range(config.n_replications)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_one_replication, config, r) for r in reps]
            nested = []
            for i, fut in enumerate(futures):
                nested.append(fut.result())
                if progress is not None:
                    progress(i + 1, config.n_replications)
    else:
        nested = []
        for i, r in enumerate(reps):
            nested.append(_one_replication(config, r))
            if progress is not None:
                progress(i + 1, config.n_replications)
    records = [rec for batch in nested for rec in batch]
    records.sort(key=lambda r: (r.algorithm, r.replication))
    return records


def tune_sgd_step(
    grid: Sequence[tuple[float, float]],
    tuning_reps: int,
    n: int,
    seed: int,
    *,
    theta,
    design: DesignSpec,
    init_halfwidth: float = 1.0,
) -> tuple[float, float]:
    """Grid point minimizing the mean final squared error on held-out streams.

    Tuning streams come from a different key domain than benchmark streams,
    so the same seed never leaks data between the two. Diverged runs score
    infinity; ties break toward smaller c_gamma, then smaller exponent.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty tuning grid")
    theta = np.asarray(theta, dtype=np.float64)
    totals = np.zeros(len(grid))
    for rep in range(tuning_reps):
        rng = keyed_rng(seed, DOMAIN_TUNING, rep)
        theta0 = theta + rng.uniform(-init_halfwidth, init_halfwidth, theta.size)
        phi, y = gen_observations(theta, design, n, rng)
        for i, (c_gamma, exponent) in enumerate(grid):
            try:
                result = fit_stream(
                    "sgd", (phi, y), config=StepSchedule(c_gamma, exponent), theta0=theta0.copy()
                )
                err = float(np.sum((result.state.theta - theta) ** 2))
            except DivergenceError:
                err = np.inf
            totals[i] += err
    if not np.any(np.isfinite(totals)):
        raise RuntimeError("every grid point diverged during tuning")
    order = sorted(range(len(grid)), key=lambda i: (totals[i], grid[i][0], grid[i][1]))
    return grid[order[0]]


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float
    count: int
    diverged: int


def summarize(records: Sequence[BenchRecord], at_n: int) -> dict[str, SummaryStats]:
    """Five-number summary plus mean of the squared error at one checkpoint.

    Diverged runs are excluded from the statistics but counted; a surviving
    record without the requested checkpoint is an error.
    """
    by_algo: dict[str, list[BenchRecord]] = {}
    for rec in records:
        by_algo.setdefault(rec.algorithm, []).append(rec)
    out = {}
    for algorithm, recs in sorted(by_algo.items()):
        diverged = sum(1 for r in recs if r.diverged_at is not None)
        values = np.array([r.error_at(at_n) for r in recs if r.diverged_at is None])
        if values.size:
            q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75])
            stats = SummaryStats(
                mean=float(values.mean()), median=float(med), q1=float(q1), q3=float(q3),
                min=float(values.min()), max=float(values.max()),
                count=values.size, diverged=diverged,
            )
        else:
            nan = float("nan")
            stats = SummaryStats(nan, nan, nan, nan, nan, nan, 0, diverged)
        out[algorithm] = stats
    return out


def mean_curve(records: Sequence[BenchRecord], algorithm: str) -> tuple[np.ndarray, np.ndarray]:
    """Checkpoint grid and mean squared error over surviving replications."""
    recs = [r for r in records if r.algorithm == algorithm and r.diverged_at is None]
    if not recs:
        raise ValueError(f"no surviving records for algorithm {algorithm!r}")
    ns = recs[0].ns
    for r in recs[1:]:
        if not np.array_equal(r.ns, ns):
            raise ValueError("records disagree on the checkpoint grid")
    errors = np.stack([r.sq_errors for r in recs])
    return ns.copy(), errors.mean(axis=0)


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    ns = np.asarray(ns, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if ns.size != values.size or ns.size < 2:
        raise ValueError("need at least two matching points")
    x = np.log(ns)
    z = np.log(values)
    x = x - x.mean()
    return float((x @ (z - z.mean())) / (x @ x))


def write_records_csv(records: Sequence[BenchRecord], path) -> None:
    """One ``algo,replication,n,sq_error`` row per surviving checkpoint."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "replication", "n", "sq_error"])
        for rec in records:
            for n, err in rec.checkpoints:
                writer.writerow([rec.algorithm, rec.replication, n, repr(err)])


def write_summary_csv(records: Sequence[BenchRecord], path) -> None:
    """Per-algorithm summary rows at every checkpoint of the common grid."""
    grids = [r.ns for r in records if r.diverged_at is None]
    if not grids:
        raise ValueError("no surviving records to summarize")
    common = grids[0]
    for g in grids[1:]:
        if not np.array_equal(g, common):
            raise ValueError("records disagree on the checkpoint grid")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "n", "mean", "median", "q1", "q3", "min", "max", "diverged"])
        for n in common.tolist():
            for algorithm, stats in summarize(records, n).items():
                writer.writerow(
                    [algorithm, n, repr(stats.mean), repr(stats.median), repr(stats.q1),
                     repr(stats.q3), repr(stats.min), repr(stats.max), stats.diverged]
                )
