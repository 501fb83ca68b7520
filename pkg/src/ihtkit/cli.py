"""Command-line benchmark harness.

Subcommands: ``phase``, ``noise``, ``trace`` (sweeps driven by a JSON config),
``rip`` (isometry constants for a described operator), ``recover`` (one-shot
solve from files). Exit codes: 0 on success, 2 on configuration errors, 3 on
numeric failure in the single-instance modes.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from . import bench, iht, rip
from .bench import ConfigError, ExperimentConfig
from .operators import from_descriptor
from .signals import load_signal_binary, load_signal_csv, save_signal_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_config(args) -> ExperimentConfig:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return ExperimentConfig.from_dict(doc, **overrides)


@contextlib.contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            yield fh


def _load_operator(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            descriptor = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read operator descriptor {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"operator descriptor {path} is not valid JSON: {exc}") from exc
    try:
        return from_descriptor(descriptor)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_measurements(path):
    try:
        if path.endswith(".bin"):
            return load_signal_binary(path)
        return load_signal_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read measurements {path}: {exc}") from exc


def _cmd_sweep(args, runner) -> int:
    config = _load_config(args)
    with _open_out(args.out) as out:
        runner(config, out)
    return EXIT_OK


def _cmd_trace(args) -> int:
    config = _load_config(args)
    try:
        with _open_out(args.out) as out:
            bench.run_convergence_trace(config, out)
    except iht.NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_rip(args) -> int:
    op = _load_operator(args.operator)
    try:
        if args.method == "exact":
            estimate = rip.exact_beta(
                op, args.sparsity, budget=args.budget, checkpoint_path=args.checkpoint
            )
        else:
            estimate = rip.estimate_beta(op, args.sparsity, args.trials, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(args.out) as out:
        json.dump(estimate.to_dict(), out, indent=2)
        out.write("\n")
    return EXIT_OK


def _cmd_recover(args) -> int:
    op = _load_operator(args.operator)
    x = _load_measurements(args.input)
    try:
        solver = iht.IhtConfig(
            sparsity=args.sparsity,
            max_iters=args.max_iters,
            residual_tol=args.residual_tol,
            trace_enabled=args.report is not None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        report = iht.run(op, x, solver)
    except (iht.NumericError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out is None:
        for value in report.estimate:
            print(repr(float(value)))
    else:
        save_signal_csv(report.estimate, args.out)
    if args.report is not None:
        with open(args.report, "w", encoding="ascii") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    print(
        f"stopped after {report.iterations_used} iterations "
        f"({report.stop_reason}), residual norm {report.residual_norm_final:.6e}",
        file=sys.stderr,
    )
    return EXIT_OK


def _add_sweep_args(parser):
    parser.add_argument("--config", required=True, help="experiment config JSON file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ihtkit", description="Sparse recovery benchmarks and diagnostics."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("phase", "phase-transition sweep over (m, s) cells"),
        ("noise", "noise-robustness sweep over noise levels"),
    ):
        p = sub.add_parser(name, help=text)
        _add_sweep_args(p)

    p = sub.add_parser("trace", help="per-iteration convergence trace of one instance")
    _add_sweep_args(p)

    p = sub.add_parser("rip", help="exact or Monte Carlo isometry constant")
    p.add_argument("--operator", required=True, help="operator descriptor JSON file")
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--method", choices=("exact", "estimate"), default="exact")
    p.add_argument("--trials", type=int, default=100, help="Monte Carlo support samples")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo sampling seed")
    p.add_argument(
        "--budget", type=int, default=rip.DEFAULT_ENUMERATION_BUDGET,
        help="max supports for exact enumeration",
    )
    p.add_argument("--checkpoint", default=None, help="resumable enumeration state file")
    p.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    p = sub.add_parser("recover", help="one-shot recovery from measurement files")
    p.add_argument("--operator", required=True, help="operator descriptor JSON file")
    p.add_argument("--input", required=True, help="measurement vector (.csv or .bin)")
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--residual-tol", type=float, default=0.0)
    p.add_argument("--out", default=None, help="estimate CSV path (default: stdout)")
    p.add_argument("--report", default=None, help="write a JSON recovery report here")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "phase":
            return _cmd_sweep(args, bench.run_phase_transition)
        if args.command == "noise":
            return _cmd_sweep(args, bench.run_noise_sweep)
        if args.command == "trace":
            return _cmd_trace(args)
        if args.command == "rip":
            return _cmd_rip(args)
        if args.command == "recover":
            return _cmd_recover(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
