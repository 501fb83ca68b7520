"""Benchmark harness: seeded instance generation, phase-transition and noise
sweeps, convergence traces, bound audits, CSV emission.

Every sweep is fully deterministic: trial (cell, index) pairs own RNG streams
derived from the experiment seed and the grid coordinates, and rows are
emitted in cell-major order. Wall-clock timings are collected in memory but
kept out of the CSV unless explicitly requested, so identical configurations
reproduce identical bytes.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import iht, rip
from .operators import (
    MeasurementOperator,
    as_index_set,
    build_bernoulli,
    build_gaussian,
    build_partial_orthonormal,
    materialize_columns,
    rescale_for_rip,
)
from .signals import CompressibleSpec, as_signal, epsilon_tilde, gen_compressible, hard_threshold

__all__ = [
    "ConfigError",
    "RankDeficiencyWarning",
    "ExperimentConfig",
    "TrialRecord",
    "TraceRow",
    "run_phase_transition",
    "run_noise_sweep",
    "run_convergence_trace",
    "oracle_recover",
    "records_to_csv",
    "trace_rows_to_csv",
]

_OPERATOR_BUILDERS = {
    "gaussian": build_gaussian,
    "bernoulli": build_bernoulli,
    "partial_orthonormal": build_partial_orthonormal,
}
_SIGNAL_KINDS = ("exact_sparse", "compressible")
_BOUND_SLACK = 1e-10


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class RankDeficiencyWarning(UserWarning):
    """Restricted operator was rank deficient; minimum-norm solution returned."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition; serializable to/from a flat JSON document.

    ``noise_sigma`` is the noise level for phase sweeps and traces;
    ``noise_sigma_values`` is the grid for noise sweeps (defaults to the
    single value). Operators are rescaled per trial from a Monte Carlo
    isometry estimate at sparsity 3s unless ``rescale_mode`` is "none".
    """

    n: int
    m_values: tuple[int, ...]
    s_values: tuple[int, ...]
    operator_kind: str = "gaussian"
    signal_kind: str = "exact_sparse"
    p: float = 0.5
    r_const: float = 1.0
    noise_sigma: float = 0.0
    noise_sigma_values: tuple[float, ...] | None = None
    trials_per_cell: int = 1
    seed: int = 0
    residual_tol: float = 1e-9
    max_iters: int = 100
    success_threshold: float = 1e-4
    rip_trials: int = 50
    rip_exact_budget: int = 2000
    rescale_mode: str = "rip"
    include_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "s_values", tuple(int(s) for s in self.s_values))
        if self.noise_sigma_values is not None:
            object.__setattr__(
                self, "noise_sigma_values", tuple(float(v) for v in self.noise_sigma_values)
            )
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if not self.m_values or not self.s_values:
            raise ConfigError("m_values and s_values must be non-empty")
        if min(self.m_values) < 1:
            raise ConfigError("all m values must be positive")
        if min(self.s_values) < 1 or max(self.s_values) > self.n:
            raise ConfigError(f"s values must lie in [1, {self.n}]")
        if self.operator_kind not in _OPERATOR_BUILDERS:
            raise ConfigError(f"unknown operator_kind {self.operator_kind!r}")
        if self.operator_kind == "partial_orthonormal" and max(self.m_values) > self.n:
            raise ConfigError("partial_orthonormal requires every m <= n")
        if self.signal_kind not in _SIGNAL_KINDS:
            raise ConfigError(f"unknown signal_kind {self.signal_kind!r}")
        if self.p <= 0 or self.r_const <= 0:
            raise ConfigError("compressible parameters p and r_const must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.noise_sigma_values is not None and (
            not self.noise_sigma_values or min(self.noise_sigma_values) < 0
        ):
            raise ConfigError("noise_sigma_values must be non-empty and nonnegative")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.residual_tol < 0:
            raise ConfigError("residual_tol must be nonnegative")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.success_threshold <= 0:
            raise ConfigError("success_threshold must be positive")
        if self.rip_trials < 1:
            raise ConfigError("rip_trials must be at least 1")
        if self.rip_exact_budget < 0:
            raise ConfigError("rip_exact_budget must be nonnegative")
        if self.rescale_mode not in ("rip", "none"):
            raise ConfigError(f"unknown rescale_mode {self.rescale_mode!r}")

    @property
    def sigma_grid(self) -> tuple[float, ...]:
        if self.noise_sigma_values is not None:
            return self.noise_sigma_values
        return (self.noise_sigma,)

    @classmethod
    def from_dict(cls, doc: dict, **overrides) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = dict(doc)
        merged.update(overrides)
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        doc = {f.name: getattr(self, f.name) for f in fields(self)}
        doc["m_values"] = list(self.m_values)
        doc["s_values"] = list(self.s_values)
        if self.noise_sigma_values is not None:
            doc["noise_sigma_values"] = list(self.noise_sigma_values)
        return doc


@dataclass(frozen=True)
class TrialRecord:
    """One solved instance of a sweep cell."""

    m: int
    n: int
    s: int
    noise_sigma: float
    trial: int
    rip_beta_estimate: float
    rip_certified: bool
    iterations_used: int
    relative_error: float
    success: bool
    e_norm: float
    eps_tilde: float
    bound_final: float
    bound_satisfied: bool
    wall_time_s: float
    failure: str = ""


@dataclass(frozen=True)
class TraceRow:
    """One iteration of a convergence trace, with its audit columns."""

    iteration: int
    residual_norm: float
    error_norm: float
    envelope: float
    within_envelope: bool
    predicted_iterations: float


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


_RECORD_COLUMNS = [
    "m", "n", "s", "noise_sigma", "trial",
    "rip_beta_estimate", "rip_certified", "iterations_used", "relative_error",
    "success", "e_norm", "eps_tilde", "bound_final", "bound_satisfied", "failure",
]


def records_to_csv(records, out, include_timing: bool = False):
    """Write trial records as CSV with a fixed column order."""
    columns = _RECORD_COLUMNS + (["wall_time_s"] if include_timing else [])
    out.write(",".join(columns) + "\n")
    for rec in records:
        out.write(",".join(_fmt(getattr(rec, col)) for col in columns) + "\n")


_TRACE_COLUMNS = [
    "iteration", "residual_norm", "error_norm", "envelope",
    "within_envelope", "predicted_iterations",
]


def trace_rows_to_csv(rows, out):
    out.write(",".join(_TRACE_COLUMNS) + "\n")
    for row in rows:
        out.write(",".join(_fmt(getattr(row, col)) for col in _TRACE_COLUMNS) + "\n")


def _trial_streams(config: ExperimentConfig, *coords: int):
    """Independent child seeds (operator, signal, noise, rip) for one trial."""
    ss = np.random.SeedSequence([int(config.seed), *[int(c) for c in coords]])
    return ss.generate_state(4, dtype=np.uint64)


def _certify(op, s_cert: int, config: ExperimentConfig, rip_seed: int):
    """Isometry estimate for the raw operator: exact at small sizes, else Monte Carlo."""
    if math.comb(op.cols, s_cert) <= config.rip_exact_budget:
        return rip.exact_beta(op, s_cert, budget=config.rip_exact_budget)
    return rip.estimate_beta(op, s_cert, config.rip_trials, rip_seed)


def _prepare_operator(config: ExperimentConfig, m: int, s: int, op_seed, rip_seed):
    """Build, certify, and (optionally) rescale one trial operator.

    Returns ``(op, beta_used, certified)`` where ``beta_used`` is the
    isometry constant of the operator actually iterated on, recomputed from
    the certified extreme singular values after rescaling.
    """
    op = _OPERATOR_BUILDERS[config.operator_kind](m, config.n, int(op_seed))
    s_cert = min(3 * s, config.n)
    est = _certify(op, s_cert, config, int(rip_seed))
    if config.rescale_mode == "rip":
        delta = min(max(est.max_singular_sq - 1.0, 0.0), 1.0 - 1e-12)
        if delta > 0.0:
            op = rescale_for_rip(op, delta)
            beta_used = max(
                1.0 - est.min_singular_sq / (1.0 + delta),
                est.max_singular_sq / (1.0 + delta) - 1.0,
                0.0,
            )
            return op, beta_used, est.method == "exact"
    return op, est.beta, est.method == "exact"


def _draw_signal(config: ExperimentConfig, s: int, signal_seed) -> np.ndarray:
    if config.signal_kind == "compressible":
        spec = CompressibleSpec(
            n=config.n, p=config.p, r_const=config.r_const, seed=int(signal_seed)
        )
        return gen_compressible(spec)
    rng = np.random.default_rng(int(signal_seed))
    y = np.zeros(config.n)
    supp = rng.choice(config.n, size=s, replace=False)
    y[supp] = rng.standard_normal(s)
    return y


def _run_trial(config: ExperimentConfig, m: int, s: int, sigma: float,
               trial: int, coords) -> TrialRecord:
    start = time.perf_counter()
    op_seed, signal_seed, noise_seed, rip_seed = _trial_streams(config, *coords)
    op, beta_used, certified = _prepare_operator(config, m, s, op_seed, rip_seed)
    y = _draw_signal(config, s, signal_seed)
    e = np.random.default_rng(int(noise_seed)).standard_normal(m) * sigma
    x = op.apply(y) + e

    ys = hard_threshold(y, s)
    ys_norm = float(np.linalg.norm(ys))
    e_norm = float(np.linalg.norm(e))
    eps = epsilon_tilde(y, s, e_norm)
    y_norm = float(np.linalg.norm(y))

    solver = iht.IhtConfig(
        sparsity=s, max_iters=config.max_iters, residual_tol=config.residual_tol
    )
    try:
        report = iht.run(op, x, solver)
    except iht.NumericError as exc:
        return TrialRecord(
            m=m, n=config.n, s=s, noise_sigma=sigma, trial=trial,
            rip_beta_estimate=beta_used, rip_certified=certified,
            iterations_used=exc.iteration, relative_error=math.nan, success=False,
            e_norm=e_norm, eps_tilde=eps, bound_final=math.nan,
            bound_satisfied=False, wall_time_s=time.perf_counter() - start,
            failure=str(exc),
        )

    k = report.iterations_used
    estimate = report.estimate
    rel = float(np.linalg.norm(y - estimate)) / y_norm if y_norm > 0 else 0.0
    if config.signal_kind == "exact_sparse":
        bound = iht.error_bound_exact_sparse(ys_norm, e_norm, k)
        err_for_bound = float(np.linalg.norm(ys - estimate))
    else:
        bound = iht.error_bound_general(iht.BoundInputs(ys_norm, eps, e_norm), k)
        err_for_bound = float(np.linalg.norm(y - estimate))
    return TrialRecord(
        m=m, n=config.n, s=s, noise_sigma=sigma, trial=trial,
        rip_beta_estimate=beta_used, rip_certified=certified,
        iterations_used=k, relative_error=rel,
        success=rel <= config.success_threshold,
        e_norm=e_norm, eps_tilde=eps, bound_final=bound,
        bound_satisfied=err_for_bound <= bound + _BOUND_SLACK,
        wall_time_s=time.perf_counter() - start,
    )


def run_phase_transition(config: ExperimentConfig, out=None) -> list[TrialRecord]:
    """Sweep (m, s, trial) at the configured noise level; emit one row per trial."""
    records = []
    for mi, m in enumerate(config.m_values):
        for si, s in enumerate(config.s_values):
            for trial in range(config.trials_per_cell):
                records.append(
                    _run_trial(config, m, s, config.noise_sigma, trial, (mi, si, trial))
                )
    if out is not None:
        records_to_csv(records, out, include_timing=config.include_timing)
    return records


def run_noise_sweep(config: ExperimentConfig, out=None) -> list[TrialRecord]:
    """Sweep (m, s, noise_sigma, trial); noise grid from ``noise_sigma_values``."""
    records = []
    for mi, m in enumerate(config.m_values):
        for si, s in enumerate(config.s_values):
            for ni, sigma in enumerate(config.sigma_grid):
                for trial in range(config.trials_per_cell):
                    records.append(
                        _run_trial(config, m, s, sigma, trial, (mi, si, ni, trial))
                    )
    if out is not None:
        records_to_csv(records, out, include_timing=config.include_timing)
    return records


def run_convergence_trace(config: ExperimentConfig, out=None) -> list[TraceRow]:
    """Per-iteration audit of a single instance (first m, first s).

    The error column tracks the distance to the best s-term approximation of
    the truth; the envelope column is the geometric worst-case decay fed by
    the realized effective noise, and the audit flag marks rows that respect
    it.
    """
    m, s = config.m_values[0], config.s_values[0]
    sigma = config.noise_sigma
    op_seed, signal_seed, noise_seed, rip_seed = _trial_streams(config, 0, 0, 0)
    op, _, _ = _prepare_operator(config, m, s, op_seed, rip_seed)
    y = _draw_signal(config, s, signal_seed)
    e = np.random.default_rng(int(noise_seed)).standard_normal(m) * sigma
    x = op.apply(y) + e

    ys = hard_threshold(y, s)
    ys_norm = float(np.linalg.norm(ys))
    eps = epsilon_tilde(y, s, float(np.linalg.norm(e)))
    eff_noise = rip.effective_noise_norm(op, y, s, e)
    try:
        predicted = float(iht.predicted_iterations(iht.BoundInputs(ys_norm, eps)))
    except iht.UnboundedIterationsError:
        predicted = math.inf

    solver = iht.IhtConfig(
        sparsity=s, max_iters=config.max_iters,
        residual_tol=config.residual_tol, trace_enabled=True,
    )
    report = iht.run(op, x, solver, truth=ys)
    rows = []
    for point in report.trace:
        envelope = 2.0 ** (-point.iteration) * ys_norm + 4.0 * eff_noise
        rows.append(
            TraceRow(
                iteration=point.iteration,
                residual_norm=point.residual_norm,
                error_norm=point.error_norm,
                envelope=envelope,
                within_envelope=point.error_norm <= envelope + _BOUND_SLACK,
                predicted_iterations=predicted,
            )
        )
    if out is not None:
        trace_rows_to_csv(rows, out)
    return rows


def oracle_recover(op: MeasurementOperator, x, support) -> np.ndarray:
    """Least-squares estimate on a known support; zero elsewhere.

    The baseline any support-aware decoder is judged against. A rank
    deficient restriction is flagged with ``RankDeficiencyWarning`` and the
    minimum-norm solution is returned.
    """
    support = as_index_set(support, op.cols)
    if support.size > op.rows:
        raise ValueError(
            f"support size {support.size} exceeds the measurement count {op.rows}"
        )
    estimate = np.zeros(op.cols)
    if support.size == 0:
        return estimate
    x = as_signal(x)
    cols = materialize_columns(op, support)
    z, _, rank, _ = np.linalg.lstsq(cols, x, rcond=None)
    if rank < support.size:
        warnings.warn(
            "restricted operator is rank deficient; returning the minimum-norm "
            "least-squares solution",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    estimate[support] = z
    return estimate
