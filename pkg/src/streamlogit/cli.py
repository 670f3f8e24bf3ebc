"""Command-line front end: simulate / fit / bench / eigs / infer.

Exit codes: 0 on success, 2 on usage errors (bad flags, out-of-range
coordinate), 1 on runtime errors (missing files, parse failures,
divergence). All randomness flows through explicit --seed flags, so every
invocation is reproducible. A ``--config`` file of ``key=value`` lines
supplies defaults; explicit flags win and each shadowed config key is
reported on the error stream.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import bench as bench_mod
from . import inference, simulate
from .estimators import (
    ALGORITHMS,
    DivergenceError,
    StepSchedule,
    TruncationConfig,
    fit_stream,
    load_snapshot,
    save_snapshot,
)
from .oracle import hessian_eigen_table

__all__ = ["main"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable
    default: object
    help: str
    choices: Optional[tuple] = None
    required: bool = False


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _theta_arg(text: str) -> np.ndarray:
    if text.strip() == "paper":
        return simulate.reference_theta()
    try:
        values = [float(f) for f in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"could not parse {text!r} as 'paper' or comma-separated reals")
    if len(values) < 2:
        raise argparse.ArgumentTypeError("theta needs at least an intercept and one coefficient")
    return np.array(values)


def _float_list(text: str) -> np.ndarray:
    try:
        return np.array([float(f) for f in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"could not parse {text!r} as comma-separated reals")


def _algo_list(text: str) -> tuple[str, ...]:
    algos = tuple(a.strip() for a in text.split(",") if a.strip())
    unknown = set(algos) - set(ALGORITHMS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithms: {sorted(unknown)}")
    if not algos:
        raise argparse.ArgumentTypeError("empty algorithm list")
    return algos


_COMMON = [
    Opt("config", str, None, "file of key=value lines supplying flag defaults"),
]

_SPECS: dict[str, list[Opt]] = {
    "simulate": [
        Opt("theta", _theta_arg, "paper", "'paper' or comma-separated coefficients"),
        Opt("n", int, None, "number of observations", required=True),
        Opt("seed", int, 0, "master seed"),
        Opt("out", str, None, "output CSV path", required=True),
        Opt("labels", str, "01", "label convention in the file", choices=("01", "rademacher")),
    ],
    "fit": [
        Opt("algo", str, None, "estimator", choices=ALGORITHMS, required=True),
        Opt("data", str, None, "input CSV path (y,x1,...,xd)", required=True),
        Opt("labels", str, "01", "label convention of the file", choices=("01", "rademacher")),
        Opt("has-header", _bool, True, "whether the file starts with a header row"),
        Opt("c-alpha", float, 1e-10, "tsn truncation constant"),
        Opt("beta", float, 0.49, "tsn truncation exponent"),
        Opt("c-gamma", float, 1.0, "sgd/asgd step constant"),
        Opt("step-exponent", float, 0.66, "sgd/asgd step exponent"),
        Opt("theta0", _float_list, None, "starting point (default: zero vector)"),
        Opt("out", str, None, "write the final state as a JSON snapshot"),
        Opt("resume", str, None, "resume from a JSON snapshot"),
    ],
    "bench": [
        Opt("algos", _algo_list, ("tsn", "sn", "sgd", "asgd"), "comma-separated algorithms"),
        Opt("reps", int, 100, "number of replications"),
        Opt("n", int, 5000, "iterations per replication"),
        Opt("seed", int, 0, "master seed"),
        Opt("theta", _theta_arg, "paper", "'paper' or comma-separated coefficients"),
        Opt("c-alpha", float, 1e-10, "tsn truncation constant"),
        Opt("beta", float, 0.49, "tsn truncation exponent"),
        Opt("c-gamma", float, 1.0, "sgd/asgd step constant"),
        Opt("step-exponent", float, 0.66, "sgd/asgd step exponent"),
        Opt("init-halfwidth", float, 1.0, "halfwidth of the starting-point box"),
        Opt("tune-sgd", _bool, False, "tune the sgd step on held-out streams first"),
        Opt("tune-reps", int, 10, "held-out replications for tuning"),
        Opt("out-dir", str, None, "directory for records.csv and summary.csv", required=True),
        Opt("workers", int, 1, "parallel replications (1 = bit-exact reference)"),
    ],
    "eigs": [
        Opt("theta", _theta_arg, "paper", "'paper' or comma-separated coefficients"),
        Opt("samples", int, 10_000_000, "Monte-Carlo sample count"),
        Opt("seed", int, 1, "oracle seed"),
        Opt("workers", int, 1, "parallel chunks (result is worker-count invariant)"),
    ],
    "infer": [
        Opt("state", str, None, "JSON snapshot of a fitted state", required=True),
        Opt("coord", int, None, "coordinate test/interval for this index"),
        Opt("contrast", _float_list, None, "contrast vector for a z-test"),
        Opt("theta0", _float_list, None, "null parameter (default: zero vector)"),
        Opt("level", float, 0.95, "confidence level"),
    ],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamlogit",
        description="Streaming logistic regression: simulate, fit, bench, eigs, infer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _SPECS.items():
        p = sub.add_parser(command)
        for opt in opts + _COMMON:
            kwargs = {"type": opt.type, "default": None, "help": opt.help, "dest": opt.name.replace("-", "_")}
            if opt.choices:
                kwargs["choices"] = opt.choices
            if opt.type is _bool:
                kwargs["metavar"] = "{true,false}"
            p.add_argument(f"--{opt.name}", **kwargs)
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from --config, then from defaults; report conflicts."""
    opts = {o.name: o for o in _SPECS[args.command]}
    if args.config is not None:
        for key, raw in _read_config(args.config).items():
            if key not in opts:
                raise UsageError(f"config key {key!r} is not a --flag of {args.command!r}")
            dest = key.replace("-", "_")
            if getattr(args, dest) is not None:
                print(f"note: config {key}={raw} overridden by --{key}", file=sys.stderr)
                continue
            try:
                setattr(args, dest, opts[key].type(raw))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config {key}: {exc}")
    for opt in opts.values():
        dest = opt.name.replace("-", "_")
        if getattr(args, dest) is None:
            if opt.required:
                raise UsageError(f"--{opt.name} is required")
            default = opt.default
            if isinstance(default, str) and opt.type is not str:
                default = opt.type(default)
            setattr(args, dest, default)
    return args


def _cmd_simulate(args) -> int:
    design = simulate.DesignSpec(d=args.theta.size - 1)
    rng = simulate.replication_rng(args.seed, 0)
    phi, y = simulate.gen_observations(args.theta, design, args.n, rng)
    simulate.write_observations_csv(args.out, phi, y, labels=args.labels)
    print(f"wrote {args.n} observations to {args.out}")
    return 0


def _fit_config(args):
    if args.algo == "tsn":
        return TruncationConfig(c_alpha=args.c_alpha, beta=args.beta)
    if args.algo in ("sgd", "asgd"):
        return StepSchedule(c_gamma=args.c_gamma, exponent=args.step_exponent)
    return None


def _cmd_fit(args) -> int:
    stream = simulate.stream_from_file(args.data, has_header=args.has_header, labels=args.labels)
    if args.resume is not None:
        if args.theta0 is not None:
            raise UsageError("--theta0 cannot be combined with --resume")
        state = load_snapshot(args.resume)
        result = fit_stream(args.algo, stream, state=state)
    else:
        result = fit_stream(args.algo, stream, config=_fit_config(args), theta0=args.theta0)
    state = result.state
    if args.out is not None:
        save_snapshot(state, args.out)
    theta_txt = ",".join(repr(v) for v in state.theta.tolist())
    print(f"{state.algorithm}\t{state.n}\t{theta_txt}")
    return 0


def _cmd_bench(args) -> int:
    step = StepSchedule(c_gamma=args.c_gamma, exponent=args.step_exponent)
    if args.tune_sgd:
        c_gamma, exponent = bench_mod.tune_sgd_step(
            bench_mod.default_sgd_grid(), args.tune_reps, args.n, args.seed,
            theta=args.theta, design=simulate.DesignSpec(d=args.theta.size - 1),
            init_halfwidth=args.init_halfwidth,
        )
        step = StepSchedule(c_gamma=c_gamma, exponent=exponent)
        print(f"tuned sgd step: c_gamma={c_gamma} exponent={exponent}")
    config = bench_mod.BenchConfig(
        theta=args.theta,
        design=simulate.DesignSpec(d=args.theta.size - 1),
        algorithms=args.algos,
        n_replications=args.reps,
        n_iterations=args.n,
        master_seed=args.seed,
        init_halfwidth=args.init_halfwidth,
        truncation=TruncationConfig(c_alpha=args.c_alpha, beta=args.beta),
        step=step,
        workers=args.workers,
    )
    every = max(1, args.reps // 10)

    def progress(done, total):
        if done % every == 0 or done == total:
            print(f"replication {done}/{total}", file=sys.stderr)

    records = bench_mod.run_benchmark(config, progress=progress)
    os.makedirs(args.out_dir, exist_ok=True)
    records_path = os.path.join(args.out_dir, "records.csv")
    summary_path = os.path.join(args.out_dir, "summary.csv")
    bench_mod.write_records_csv(records, records_path)
    bench_mod.write_summary_csv(records, summary_path)
    print(f"wrote {records_path} and {summary_path}")
    return 0


def _cmd_eigs(args) -> int:
    design = simulate.DesignSpec(d=args.theta.size - 1)
    eig = hessian_eigen_table(args.theta, design, args.samples, args.seed, workers=args.workers)
    for value in eig:
        print(f"{value:.5e}")
    return 0


def _cmd_infer(args) -> int:
    state = load_snapshot(args.state)
    if args.coord is not None and args.contrast is not None:
        raise UsageError("--coord and --contrast are mutually exclusive")
    if args.coord is not None:
        if not 0 <= args.coord < state.theta.size:
            raise UsageError(
                f"--coord {args.coord} out of range for a {state.theta.size}-dim state"
            )
        report = inference.coordinate_report(state, args.coord, level=args.level)
    elif args.contrast is not None:
        report = inference.contrast_report(state, args.contrast, theta0=args.theta0, level=args.level)
    else:
        theta0 = args.theta0 if args.theta0 is not None else np.zeros(state.theta.size)
        report = inference.region_report(state, theta0, level=args.level)
    interval = "-" if report.interval is None else f"{report.interval[0]!r},{report.interval[1]!r}"
    print(f"{report.statistic!r}\t{report.law}\t{report.p_value!r}\t{interval}")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "bench": _cmd_bench,
    "eigs": _cmd_eigs,
    "infer": _cmd_infer,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _resolve(args)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, TypeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
