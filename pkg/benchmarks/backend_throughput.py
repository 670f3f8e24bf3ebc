#!/usr/bin/env python3
"""Throughput comparison of the compiled kernels against the Python twin.

Runs each estimator over a fixed stream for every available backend and
prints steps per second plus the speedup. The per-observation recursions
dominate the package's runtime, which is why they live in a compiled core.

Usage: python benchmarks/backend_throughput.py [--n 200000] [--d 10]
"""

import argparse
import time

import numpy as np

from streamlogit._backend import available_backends
from streamlogit.estimators import StepSchedule, TruncationConfig, fit_stream
from streamlogit.simulate import DesignSpec, gen_observations, reference_theta, replication_rng

CONFIGS = {
    "tsn": TruncationConfig(1e-10, 0.49),
    "sn": None,
    "rls": None,
    "sgd": StepSchedule(1.0, 0.66),
    "asgd": StepSchedule(1.0, 0.66),
}


def time_run(algorithm, data, config, backend, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fit_stream(algorithm, data, config=config, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200_000, help="stream length")
    parser.add_argument("--d", type=int, default=10, help="covariate dimension")
    args = parser.parse_args()

    if args.d == 10:
        theta = reference_theta()
    else:
        rng = np.random.default_rng(0)
        theta = rng.normal(size=args.d + 1)
    data = gen_observations(theta, DesignSpec(d=args.d), args.n, replication_rng(1, 0))

    backends = available_backends()
    print(f"stream: n={args.n}, dim={args.d + 1}; backends: {', '.join(backends)}")
    header = f"{'algorithm':<10}" + "".join(f"{b + ' (steps/s)':>22}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for algorithm, config in CONFIGS.items():
        rates = {}
        # python fallback gets a shorter stream to keep the run quick
        for backend in backends:
            n_b = args.n if backend == "compiled" else max(args.n // 20, 1)
            sliced = (data[0][:n_b], data[1][:n_b])
            rates[backend] = n_b / time_run(algorithm, sliced, config, backend)
        row = f"{algorithm:<10}" + "".join(f"{rates[b]:>22,.0f}" for b in backends)
        if "compiled" in rates and "python" in rates:
            row += f"{rates['compiled'] / rates['python']:>9.0f}x"
        print(row)


if __name__ == "__main__":
    main()
