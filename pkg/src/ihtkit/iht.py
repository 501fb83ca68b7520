"""The hard-thresholding iteration, its run loop, and the accuracy bounds
that certify it: per-iteration envelopes, iteration-count predictions, and
the residual-based stopping rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import MeasurementOperator, _as_vector
from .signals import hard_threshold

__all__ = [
    "IhtConfig",
    "IhtState",
    "RecoveryReport",
    "TracePoint",
    "BoundInputs",
    "NumericError",
    "UnboundedIterationsError",
    "STOP_RESIDUAL_TOL",
    "STOP_MAX_ITERS",
    "initial_state",
    "iht_step",
    "run",
    "predicted_iterations",
    "error_bound_general",
    "error_bound_exact_sparse",
    "stopping_error_bound",
    "residual_tol_for_accuracy",
]

STOP_RESIDUAL_TOL = "residual_tol"
STOP_MAX_ITERS = "max_iters"

# Abort threshold for the divergence guard: convergence is only guaranteed
# under the near-isometry hypothesis, and unscaled operators can blow up.
_DIVERGENCE_FACTOR = 1e6


class NumericError(RuntimeError):
    """Non-finite values or runaway residual growth during a run."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class UnboundedIterationsError(ValueError):
    """Iteration prediction is infinite (zero unrecoverable energy)."""


@dataclass(frozen=True)
class IhtConfig:
    """Solver knobs: target sparsity, iteration cap, residual stopping tolerance."""

    sparsity: int
    max_iters: int
    residual_tol: float = 0.0
    trace_enabled: bool = False

    def __post_init__(self):
        if self.sparsity < 1:
            raise ValueError(f"sparsity must be at least 1, got {self.sparsity}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.residual_tol < 0:
            raise ValueError(f"residual_tol must be nonnegative, got {self.residual_tol}")


@dataclass(frozen=True)
class IhtState:
    """Solver state after ``iteration`` steps.

    ``residual`` always equals ``x - op.apply(estimate)``; it is refreshed
    from scratch each step rather than updated incrementally.
    """

    estimate: np.ndarray
    iteration: int
    residual: np.ndarray
    residual_norm: float


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    residual_norm: float
    error_norm: float | None = None


@dataclass(frozen=True)
class RecoveryReport:
    """Final estimate plus run diagnostics."""

    estimate: np.ndarray
    iterations_used: int
    stop_reason: str
    residual_norm_final: float
    trace: tuple[TracePoint, ...] | None = None

    def to_dict(self) -> dict:
        doc = {
            "estimate": [float(v) for v in self.estimate],
            "iterations_used": self.iterations_used,
            "stop_reason": self.stop_reason,
            "residual_norm_final": self.residual_norm_final,
        }
        if self.trace is not None:
            doc["trace"] = [
                {"iteration": p.iteration, "residual_norm": p.residual_norm}
                | ({} if p.error_norm is None else {"error_norm": p.error_norm})
                for p in self.trace
            ]
        return doc

    def trace_csv(self) -> str:
        """Per-iteration trace as CSV text; error column only when recorded."""
        if self.trace is None:
            raise ValueError("run was executed without trace_enabled")
        with_error = any(p.error_norm is not None for p in self.trace)
        lines = ["iteration,residual_norm" + (",error_norm" if with_error else "")]
        for p in self.trace:
            row = f"{p.iteration},{float(p.residual_norm)!r}"
            if with_error:
                row += f",{float(p.error_norm)!r}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def initial_state(op: MeasurementOperator, x) -> IhtState:
    """Start of every run: zero estimate, so the residual is x itself."""
    x = _as_vector(x, op.rows, "initial_state")
    return IhtState(
        estimate=np.zeros(op.cols),
        iteration=0,
        residual=x.copy(),
        residual_norm=float(np.linalg.norm(x)),
    )


def iht_step(state: IhtState, op: MeasurementOperator, x, s: int) -> IhtState:
    """One update: threshold the gradient step, then refresh the residual.

    Costs exactly one adjoint application (gradient, reusing the stored
    residual) and one forward application (new residual).
    """
    x = _as_vector(x, op.rows, "iht_step")
    proposal = state.estimate + op.apply_adjoint(state.residual)
    estimate = hard_threshold(proposal, s)
    residual = x - op.apply(estimate)
    return IhtState(
        estimate=estimate,
        iteration=state.iteration + 1,
        residual=residual,
        residual_norm=float(np.linalg.norm(residual)),
    )


def run(op: MeasurementOperator, x, config: IhtConfig, truth=None) -> RecoveryReport:
    """Recover a sparse estimate from measurements x.

    Starts from the zero vector and iterates until the residual norm drops
    to ``config.residual_tol`` or ``config.max_iters`` steps have run. When
    ``truth`` is supplied and tracing is on, the trace also records the
    distance to it at every iteration (including iteration 0).

    Raises ``NumericError`` if non-finite values appear or the residual norm
    grows a million-fold over its initial value.
    """
    if config.sparsity > op.cols:
        raise ValueError(
            f"sparsity {config.sparsity} exceeds the operator width {op.cols}"
        )
    x = _as_vector(x, op.rows, "run")
    if not np.all(np.isfinite(x)):
        raise NumericError("measurement vector contains non-finite values", 0)
    if truth is not None:
        truth = _as_vector(truth, op.cols, "run(truth)")

    state = initial_state(op, x)
    initial_norm = state.residual_norm
    trace: list[TracePoint] | None = [] if config.trace_enabled else None

    def record(st: IhtState):
        if trace is not None:
            err = None if truth is None else float(np.linalg.norm(truth - st.estimate))
            trace.append(TracePoint(st.iteration, st.residual_norm, err))

    record(state)
    stop_reason = STOP_MAX_ITERS
    if state.residual_norm <= config.residual_tol:
        stop_reason = STOP_RESIDUAL_TOL
    else:
        for _ in range(config.max_iters):
            try:
                state = iht_step(state, op, x, config.sparsity)
            except ValueError as exc:
                raise NumericError(str(exc), state.iteration + 1) from exc
            if not math.isfinite(state.residual_norm):
                raise NumericError("residual norm is non-finite", state.iteration)
            if state.residual_norm > _DIVERGENCE_FACTOR * initial_norm:
                raise NumericError(
                    f"residual norm {state.residual_norm:.3e} exceeds "
                    f"{_DIVERGENCE_FACTOR:.0e} times its initial value",
                    state.iteration,
                )
            record(state)
            if state.residual_norm <= config.residual_tol:
                stop_reason = STOP_RESIDUAL_TOL
                break

    return RecoveryReport(
        estimate=state.estimate,
        iterations_used=state.iteration,
        stop_reason=stop_reason,
        residual_norm_final=state.residual_norm,
        trace=None if trace is None else tuple(trace),
    )


@dataclass(frozen=True)
class BoundInputs:
    """Quantities the accuracy bounds are evaluated from."""

    ys_norm: float
    eps_tilde: float
    e_norm: float = 0.0

    def __post_init__(self):
        for name in ("ys_norm", "eps_tilde", "e_norm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def predicted_iterations(bounds: BoundInputs) -> int:
    """Iterations sufficient to reach the asymptotic accuracy floor.

    ``ceil(log2(ys_norm / eps_tilde))``, floored at zero once the signal norm
    is already below the floor. Zero unrecoverable energy means the floor is
    exact recovery, which the iteration only approaches geometrically.
    """
    if bounds.eps_tilde == 0:
        raise UnboundedIterationsError(
            "eps_tilde is zero: exact recovery needs unboundedly many iterations"
        )
    if bounds.ys_norm <= bounds.eps_tilde:
        return 0
    return max(0, math.ceil(math.log2(bounds.ys_norm / bounds.eps_tilde)))


def error_bound_general(bounds: BoundInputs, k: int) -> float:
    """Worst-case error after k iterations, arbitrary truth: 2**-k * ||y^s|| + 5 eps."""
    if k < 0:
        raise ValueError(f"iteration count must be nonnegative, got {k}")
    return 2.0 ** (-k) * bounds.ys_norm + 5.0 * bounds.eps_tilde


def error_bound_exact_sparse(ys_norm: float, e_norm: float, k: int) -> float:
    """Worst-case error after k iterations, exactly sparse truth: 2**-k * ||y^s|| + 4 ||e||."""
    if k < 0:
        raise ValueError(f"iteration count must be nonnegative, got {k}")
    return 2.0 ** (-k) * ys_norm + 4.0 * e_norm


def stopping_error_bound(epsilon: float, eps_tilde: float) -> float:
    """Error guarantee once the residual has dropped to epsilon: 1.07 (eps + 2 eps_tilde)."""
    if epsilon < 0 or eps_tilde < 0:
        raise ValueError("stopping bound inputs must be nonnegative")
    return 1.07 * (epsilon + 2.0 * eps_tilde)


def residual_tol_for_accuracy(c: float, eps_tilde: float) -> float:
    """Residual tolerance that certifies a final error of c * eps_tilde.

    Only accuracy multiples c > 5 are ever guaranteed, so smaller values are
    rejected.
    """
    if c <= 5.0:
        raise ValueError(
            f"accuracy multiple must exceed 5 (the guarantee boundary), got {c}"
        )
    if eps_tilde < 0:
        raise ValueError(f"eps_tilde must be nonnegative, got {eps_tilde}")
    return (c / 1.07 - 2.0) * eps_tilde
