"""Sparse and compressible signals: thresholding, tail errors, generation, I/O."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_signal",
    "hard_threshold",
    "best_s_error",
    "support",
    "epsilon_tilde",
    "CompressibleSpec",
    "gen_compressible",
    "compressible_tail_bounds",
    "save_signal_csv",
    "load_signal_csv",
    "save_signal_binary",
    "load_signal_binary",
]


def as_signal(values) -> np.ndarray:
    """Coerce to a 1-d float64 array, rejecting NaN/Inf entries."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"signal must be 1-d, got {arr.ndim}-d")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite entries")
    return arr


def _check_sparsity(s: int, n: int):
    if not 0 <= s <= n:
        raise ValueError(f"sparsity must lie in [0, {n}], got {s}")


def hard_threshold(v, s: int) -> np.ndarray:
    """Keep the s largest-magnitude entries of v, zeroing the rest.

    Magnitude ties are broken in favour of the lowest index, so the result
    is deterministic.
    """
    v = as_signal(v)
    _check_sparsity(s, v.size)
    if s == v.size:
        return v.copy()
    out = np.zeros_like(v)
    if s == 0:
        return out
    # stable sort on descending magnitude -> equal magnitudes keep index order
    keep = np.argsort(-np.abs(v), kind="stable")[:s]
    out[keep] = v[keep]
    return out


def best_s_error(v, s: int, norm: str = "l2") -> float:
    """Distance from v to its best s-sparse approximation, in l1 or l2.

    Keeping the largest magnitudes is optimal in both norms, so this equals
    the minimum over every s-sparse approximant.
    """
    v = as_signal(v)
    residual = v - hard_threshold(v, s)
    if norm == "l2":
        return float(np.linalg.norm(residual))
    if norm == "l1":
        return float(np.abs(residual).sum())
    raise ValueError(f"norm must be 'l1' or 'l2', got {norm!r}")


def support(v) -> np.ndarray:
    """Sorted indices of the exactly-nonzero entries."""
    return np.flatnonzero(as_signal(v))


def epsilon_tilde(y, s: int, e_norm: float) -> float:
    """Unrecoverable-energy term: l2 tail + l1 tail / sqrt(s) + noise norm.

    The noise floor no s-sparse estimate can beat.
    """
    y = as_signal(y)
    if not 1 <= s <= y.size:
        raise ValueError(f"sparsity must lie in [1, {y.size}], got {s}")
    if e_norm < 0:
        raise ValueError(f"noise norm must be nonnegative, got {e_norm}")
    return best_s_error(y, s, "l2") + best_s_error(y, s, "l1") / np.sqrt(s) + float(e_norm)


@dataclass(frozen=True)
class CompressibleSpec:
    """Power-law signal family: rank-i magnitude equals r_const * i**(-1/p)."""

    n: int
    p: float
    r_const: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"signal length must be positive, got {self.n}")
        if self.p <= 0:
            raise ValueError(f"decay exponent p must be positive, got {self.p}")
        if self.r_const <= 0:
            raise ValueError(f"magnitude constant must be positive, got {self.r_const}")


def gen_compressible(spec: CompressibleSpec) -> np.ndarray:
    """Draw a compressible signal meeting the power law with equality.

    Magnitudes are exactly r_const * i**(-1/p) over ranks i = 1..n; signs and
    positions are randomized. Deterministic per spec.
    """
    rng = np.random.default_rng(spec.seed)
    ranks = np.arange(1, spec.n + 1, dtype=np.float64)
    values = spec.r_const * ranks ** (-1.0 / spec.p)
    values *= rng.choice([-1.0, 1.0], size=spec.n)
    return values[rng.permutation(spec.n)]


def compressible_tail_bounds(spec: CompressibleSpec, s: int) -> tuple[float, float]:
    """Exact finite-length tail sums dominating the best-s approximation error.

    Returns ``(l2_bound, l1_bound)`` where the tails run over ranks s+1..n.
    Any signal obeying the power law has best-s errors at most these values;
    ``gen_compressible`` output attains them exactly.
    """
    if not 1 <= s <= spec.n:
        raise ValueError(f"sparsity must lie in [1, {spec.n}], got {s}")
    ranks = np.arange(s + 1, spec.n + 1, dtype=np.float64)
    l2 = spec.r_const * np.sqrt(np.sum(ranks ** (-2.0 / spec.p)))
    l1 = spec.r_const * np.sum(ranks ** (-1.0 / spec.p))
    return float(l2), float(l1)


def save_signal_csv(v, path):
    """One value per line, shortest round-trip decimal form."""
    v = as_signal(v)
    with open(path, "w", encoding="ascii") as fh:
        for value in v:
            fh.write(repr(float(value)) + "\n")


def load_signal_csv(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        values = [float(line) for line in fh if line.strip()]
    return as_signal(values)


_LEN_HEADER = struct.Struct("<Q")


def save_signal_binary(v, path):
    """Compact layout: uint64 little-endian length, then float64 LE values."""
    v = as_signal(v)
    with open(path, "wb") as fh:
        fh.write(_LEN_HEADER.pack(v.size))
        fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_signal_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_LEN_HEADER.size)
        if len(header) != _LEN_HEADER.size:
            raise ValueError(f"truncated signal file {path}")
        (n,) = _LEN_HEADER.unpack(header)
        data = np.frombuffer(fh.read(8 * n), dtype="<f8")
    if data.size != n:
        raise ValueError(f"signal file {path} declares {n} values, found {data.size}")
    return as_signal(data.astype(np.float64))
