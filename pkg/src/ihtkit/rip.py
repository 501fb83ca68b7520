"""Restricted-isometry constants: exact enumeration, Monte Carlo screens,
beta/delta conversion, and executable forms of the supporting inequalities.

The one-sided near-isometry used throughout bounds the squared norms of
s-column submatrices by ``(1 - beta_s) <= sigma**2 <= 1``. For raw random
operators the upper edge usually exceeds one; ``exact_beta`` then reports the
two-sided spread ``max(1 - sigma_min**2, sigma_max**2 - 1)`` together with a
violation flag, and callers wanting the strict one-sided form rescale first.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .operators import MeasurementOperator, as_index_set, materialize_columns
from .signals import as_signal, hard_threshold

__all__ = [
    "RipEstimate",
    "EnumerationBudgetError",
    "DEFAULT_ENUMERATION_BUDGET",
    "exact_beta",
    "estimate_beta",
    "beta_to_delta",
    "delta_to_beta",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "effective_noise_norm",
]

DEFAULT_ENUMERATION_BUDGET = 10**6
_CHUNK = 8192


class EnumerationBudgetError(ValueError):
    """Exhaustive support enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class RipEstimate:
    """Isometry constant for one sparsity level.

    ``beta`` is exact when ``method == "exact"`` and a lower bound on the true
    constant when ``method == "monte_carlo"``. ``delta`` is the equivalent
    symmetric-form constant, ``beta / (2 - beta)`` (infinite for beta >= 2).
    """

    sparsity: int
    beta: float
    delta: float
    method: str
    trials: int
    supports_examined: int
    max_singular_sq: float
    min_singular_sq: float
    worst_support: tuple[int, ...] = field(default=())

    @property
    def upper_bound_violated(self) -> bool:
        """True when some submatrix has squared singular value above one."""
        return self.max_singular_sq > 1.0

    def to_dict(self) -> dict:
        return {
            "sparsity": self.sparsity,
            "beta": self.beta,
            "delta": self.delta,
            "method": self.method,
            "trials": self.trials,
            "supports_examined": self.supports_examined,
            "max_singular_sq": self.max_singular_sq,
            "min_singular_sq": self.min_singular_sq,
            "worst_support": list(self.worst_support),
            "upper_bound_violated": self.upper_bound_violated,
        }


def beta_to_delta(beta: float) -> float:
    """Convert the one-sided constant to the symmetric form: beta / (2 - beta)."""
    if not 0.0 <= beta < 2.0:
        raise ValueError(f"beta must lie in [0, 2), got {beta}")
    return beta / (2.0 - beta)


def delta_to_beta(delta: float) -> float:
    """Inverse conversion: 2 * delta / (1 + delta)."""
    if delta < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    return 2.0 * delta / (1.0 + delta)


def _extreme_eigs(gram_full: np.ndarray, supports: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min/max gram eigenvalues for a batch of supports, shape (B, s)."""
    grams = gram_full[supports[:, :, None], supports[:, None, :]]
    eigs = np.linalg.eigvalsh(grams)
    return eigs[:, 0], eigs[:, -1]


def _checkpoint_load(path, rows, cols, sparsity):
    if path is None or not os.path.exists(path):
        return None
    with open(path, "r", encoding="ascii") as fh:
        state = json.load(fh)
    key = (state.get("rows"), state.get("cols"), state.get("sparsity"))
    if key != (rows, cols, sparsity):
        raise ValueError(
            f"checkpoint {path} was written for operator {key}, "
            f"not ({rows}, {cols}, {sparsity})"
        )
    return state


def _checkpoint_save(path, state):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        json.dump(state, fh)
    os.replace(tmp, path)


def exact_beta(
    op: MeasurementOperator,
    s: int,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    checkpoint_path=None,
) -> RipEstimate:
    """Exhaustive isometry constant over every s-column support.

    Enumerates supports in lexicographic order, taking extreme eigenvalues of
    each s x s gram, and returns the smallest beta making the near-isometry
    hold over all of them, clamped below at zero. Refuses instances whose
    support count exceeds ``budget`` (use ``estimate_beta`` there). When
    ``checkpoint_path`` is given, progress is persisted after each chunk and
    an interrupted enumeration resumes from the recorded support index.
    """
    n = op.cols
    if not 1 <= s <= n:
        raise ValueError(f"sparsity must lie in [1, {n}], got {s}")
    total = math.comb(n, s)
    if total > budget:
        raise EnumerationBudgetError(
            f"{total} supports exceed the enumeration budget of {budget}; "
            "use estimate_beta for a Monte Carlo lower bound"
        )
    cols = materialize_columns(op)
    gram_full = cols.T @ cols

    start = 0
    max_sq, min_sq = -np.inf, np.inf
    worst: tuple[int, ...] = ()
    worst_beta = -np.inf
    resumed = _checkpoint_load(checkpoint_path, op.rows, n, s)
    if resumed is not None:
        start = int(resumed["next_index"])
        max_sq = float(resumed["max_singular_sq"])
        min_sq = float(resumed["min_singular_sq"])
        worst = tuple(resumed["worst_support"])
        worst_beta = max(1.0 - min_sq, max_sq - 1.0)

    combos = itertools.islice(itertools.combinations(range(n), s), start, None)
    done = start
    while done < total:
        chunk = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
            dtype=np.int64,
        ).reshape(-1, s)
        lo, hi = _extreme_eigs(gram_full, chunk)
        spread = np.maximum(1.0 - lo, hi - 1.0)
        pick = int(np.argmax(spread))
        if spread[pick] > worst_beta:
            worst_beta = float(spread[pick])
            worst = tuple(int(i) for i in chunk[pick])
        max_sq = max(max_sq, float(hi.max()))
        min_sq = min(min_sq, float(lo.min()))
        done += chunk.shape[0]
        if checkpoint_path is not None:
            _checkpoint_save(
                checkpoint_path,
                {
                    "rows": op.rows,
                    "cols": n,
                    "sparsity": s,
                    "next_index": done,
                    "max_singular_sq": max_sq,
                    "min_singular_sq": min_sq,
                    "worst_support": list(worst),
                },
            )

    beta = max(1.0 - min_sq, max_sq - 1.0, 0.0)
    return RipEstimate(
        sparsity=s,
        beta=beta,
        delta=beta_to_delta(beta) if beta < 2.0 else math.inf,
        method="exact",
        trials=0,
        supports_examined=total,
        max_singular_sq=max_sq,
        min_singular_sq=min_sq,
        worst_support=worst,
    )


def estimate_beta(op: MeasurementOperator, s: int, trials: int, seed: int) -> RipEstimate:
    """Monte Carlo lower bound on the isometry constant.

    Samples ``trials`` random s-subsets and maximizes the spread over them.
    Trial t draws its support from an RNG stream keyed by ``(seed, t)``, so
    results are reproducible and a longer run extends a shorter one.
    """
    n = op.cols
    if not 1 <= s <= n:
        raise ValueError(f"sparsity must lie in [1, {n}], got {s}")
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    cols = materialize_columns(op)
    gram_full = cols.T @ cols

    supports = np.empty((trials, s), dtype=np.int64)
    for t in range(trials):
        rng = np.random.default_rng([int(seed), t])
        supports[t] = np.sort(rng.choice(n, size=s, replace=False))
    lo, hi = _extreme_eigs(gram_full, supports)
    spread = np.maximum(1.0 - lo, hi - 1.0)
    pick = int(np.argmax(spread))
    beta = max(float(spread[pick]), 0.0)
    distinct = {tuple(row) for row in supports}
    return RipEstimate(
        sparsity=s,
        beta=beta,
        delta=beta_to_delta(beta) if beta < 2.0 else math.inf,
        method="monte_carlo",
        trials=trials,
        supports_examined=len(distinct),
        max_singular_sq=float(hi.max()),
        min_singular_sq=float(lo.min()),
        worst_support=tuple(int(i) for i in supports[pick]),
    )


def _restricted_gram(op, indices):
    cols = materialize_columns(op, indices)
    return cols.T @ cols


def check_lemma1(op: MeasurementOperator, gamma, beta_s: float) -> float:
    """Margin of ``||(I - Phi_G^T Phi_G) y_G|| <= beta_s ||y_G||``.

    Returns ``beta_s - ||I - Phi_G^T Phi_G||_2``; nonnegative means the
    inequality holds for every vector supported on gamma.
    """
    gamma = as_index_set(gamma, op.cols)
    gram = _restricted_gram(op, gamma)
    deviation = np.eye(gamma.size) - gram
    opnorm = float(np.abs(scipy.linalg.eigvalsh(deviation)).max()) if gamma.size else 0.0
    return float(beta_s) - opnorm


def check_lemma2(op: MeasurementOperator, gamma, lam, beta_s: float) -> float:
    """Margin of the disjoint-support cross bound ``||Phi_G^T Phi_L|| <= beta_s``."""
    gamma = as_index_set(gamma, op.cols)
    lam = as_index_set(lam, op.cols)
    if np.intersect1d(gamma, lam).size:
        raise ValueError("index sets must be disjoint")
    cols_g = materialize_columns(op, gamma)
    cols_l = materialize_columns(op, lam)
    cross = cols_g.T @ cols_l
    opnorm = float(scipy.linalg.svdvals(cross).max()) if cross.size else 0.0
    return float(beta_s) - opnorm


def check_lemma3(op: MeasurementOperator, y, s: int) -> float:
    """Margin of ``||Phi y|| <= ||y|| + ||y||_1 / sqrt(s)`` for arbitrary y.

    Meaningful when the operator satisfies the upper near-isometry bound at
    sparsity s (rescale first if needed).
    """
    y = as_signal(y)
    if s < 1:
        raise ValueError(f"sparsity must be positive, got {s}")
    bound = float(np.linalg.norm(y)) + float(np.abs(y).sum()) / math.sqrt(s)
    return bound - float(np.linalg.norm(op.apply(y)))


def effective_noise_norm(op: MeasurementOperator, y, s: int, e) -> float:
    """Realized norm of the effective noise ``Phi (y - y^s) + e``.

    For comparison against the ``epsilon_tilde`` bound; equals ``||e||`` when
    y is exactly s-sparse.
    """
    y = as_signal(y)
    e = np.asarray(e, dtype=np.float64)
    tail = y - hard_threshold(y, s)
    return float(np.linalg.norm(op.apply(tail) + e))
