"""Measurement operators: M x N linear maps with forward and adjoint application.

Operators are immutable after construction and are applied matrix-free where
the structure allows it; only the dense kind stores explicit coefficients.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.fft import dct, idct

__all__ = [
    "DimensionMismatchError",
    "ShapeWarning",
    "MeasurementOperator",
    "DenseOperator",
    "SubsampledOrthonormalOperator",
    "ColumnRestriction",
    "CountingOperator",
    "as_index_set",
    "materialize_columns",
    "build_gaussian",
    "build_bernoulli",
    "build_partial_orthonormal",
    "restrict_columns",
    "rescale_for_rip",
    "to_descriptor",
    "from_descriptor",
]


class DimensionMismatchError(ValueError):
    """Vector length does not match the operator dimensions."""


class ShapeWarning(UserWarning):
    """Operator has more rows than columns (not a compressive geometry)."""


def _as_vector(v, length: int, label: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise DimensionMismatchError(
            f"{label} expects a length-{length} vector, got shape {arr.shape}"
        )
    return arr


def as_index_set(indices, n: int) -> np.ndarray:
    """Validate and canonicalize a column index set.

    Returns a sorted int64 array of distinct indices in ``[0, n)``.
    Raises ``ValueError`` on duplicates or out-of-range entries.
    """
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size:
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError(f"index set contains entries outside [0, {n})")
        if np.unique(idx).size != idx.size:
            raise ValueError("index set contains duplicate entries")
    return np.sort(idx)


class MeasurementOperator:
    """Base class for sampling operators.

    Subclasses implement ``_forward``/``_adjoint`` for the unscaled map;
    ``apply``/``apply_adjoint`` validate dimensions and fold in the global
    ``scale`` factor. Instances never mutate after ``__init__``, so they can
    be shared freely across threads.
    """

    kind = "abstract"

    def __init__(self, rows: int, cols: int, scale: float = 1.0, *, warn_shape: bool = True):
        rows, cols = int(rows), int(cols)
        if rows < 1:
            raise ValueError(f"operator needs at least one row, got {rows}")
        if cols < 0:
            raise ValueError(f"operator column count must be nonnegative, got {cols}")
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        if warn_shape and rows > cols:
            warnings.warn(
                f"operator is {rows}x{cols}: more rows than columns", ShapeWarning, stacklevel=3
            )
        self.rows = rows
        self.cols = cols
        self.scale = float(scale)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def apply(self, v) -> np.ndarray:
        """Forward map: scale * (Phi @ v)."""
        v = _as_vector(v, self.cols, f"{self.kind}.apply")
        return self.scale * self._forward(v)

    def apply_adjoint(self, x) -> np.ndarray:
        """Adjoint map: scale * (Phi.T @ x)."""
        x = _as_vector(x, self.rows, f"{self.kind}.apply_adjoint")
        return self.scale * self._adjoint(x)

    def _forward(self, v):
        raise NotImplementedError

    def _adjoint(self, x):
        raise NotImplementedError

    def with_scale(self, scale: float) -> "MeasurementOperator":
        """Copy of this operator with a different global scale."""
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.rows}x{self.cols} scale={self.scale:g}>"


class DenseOperator(MeasurementOperator):
    """Operator backed by an explicit row-major coefficient array."""

    kind = "dense"

    def __init__(self, matrix, scale: float = 1.0, *, family: str | None = None,
                 seed: int | None = None):
        matrix = np.array(matrix, dtype=np.float64, order="C")
        if matrix.ndim != 2:
            raise ValueError(f"dense payload must be 2-d, got {matrix.ndim}-d")
        super().__init__(matrix.shape[0], matrix.shape[1], scale)
        matrix.setflags(write=False)
        self.matrix = matrix
        self.family = family
        self.seed = seed

    def _forward(self, v):
        return self.matrix @ v

    def _adjoint(self, x):
        return self.matrix.T @ x

    def with_scale(self, scale):
        op = DenseOperator.__new__(DenseOperator)
        MeasurementOperator.__init__(op, self.rows, self.cols, scale, warn_shape=False)
        op.matrix = self.matrix
        op.family = self.family
        op.seed = self.seed
        return op


class SubsampledOrthonormalOperator(MeasurementOperator):
    """Rows of the N x N orthonormal DCT-II matrix, drawn without replacement.

    Forward and adjoint run through the fast transform in O(N log N); the
    dense submatrix is never formed. The sqrt(N/M) factor makes the expected
    squared measurement norm of a unit vector equal to one.
    """

    kind = "subsampled-orthonormal"

    def __init__(self, row_indices, cols: int, scale: float = 1.0, *, seed: int | None = None):
        idx = as_index_set(row_indices, int(cols))
        if idx.size == 0:
            raise ValueError("at least one row must be selected")
        super().__init__(idx.size, cols, scale, warn_shape=False)
        idx.setflags(write=False)
        self.row_indices = idx
        self.seed = seed
        self._root = np.sqrt(self.cols / self.rows)

    def _forward(self, v):
        return self._root * dct(v, type=2, norm="ortho")[self.row_indices]

    def _adjoint(self, x):
        padded = np.zeros(self.cols)
        padded[self.row_indices] = x
        return self._root * idct(padded, type=2, norm="ortho")

    def with_scale(self, scale):
        return SubsampledOrthonormalOperator(
            self.row_indices, self.cols, scale, seed=self.seed
        )


class ColumnRestriction(MeasurementOperator):
    """Sub-operator Phi_Gamma keeping only the columns listed in ``indices``.

    Forward application zero-pads the restricted input and delegates to the
    base operator, so the restriction stays matrix-free for structured kinds.
    """

    kind = "column-restriction"

    def __init__(self, base: MeasurementOperator, indices, scale: float = 1.0):
        idx = as_index_set(indices, base.cols)
        super().__init__(base.rows, idx.size, scale, warn_shape=False)
        idx.setflags(write=False)
        self.base = base
        self.indices = idx

    def _forward(self, v):
        padded = np.zeros(self.base.cols)
        padded[self.indices] = v
        return self.base.apply(padded)

    def _adjoint(self, x):
        return self.base.apply_adjoint(x)[self.indices]

    def with_scale(self, scale):
        return ColumnRestriction(self.base, self.indices, scale)


class CountingOperator(MeasurementOperator):
    """Instrumented wrapper counting forward/adjoint applications.

    Unlike the other kinds this wrapper is stateful (the two counters), so a
    given instance should be used from one thread at a time.
    """

    kind = "counting"

    def __init__(self, base: MeasurementOperator):
        super().__init__(base.rows, base.cols, 1.0, warn_shape=False)
        self.base = base
        self.forward_count = 0
        self.adjoint_count = 0

    def _forward(self, v):
        self.forward_count += 1
        return self.base.apply(v)

    def _adjoint(self, x):
        self.adjoint_count += 1
        return self.base.apply_adjoint(x)

    def reset_counts(self):
        self.forward_count = 0
        self.adjoint_count = 0


def materialize_columns(op: MeasurementOperator, indices=None) -> np.ndarray:
    """Columns of the scaled operator, as an explicit array.

    Structured kinds are probed with basis vectors (one forward application
    per requested column); dense kinds are sliced directly.
    """
    if indices is None:
        indices = np.arange(op.cols)
    indices = np.asarray(indices, dtype=np.int64)
    if isinstance(op, DenseOperator):
        return op.scale * op.matrix[:, indices]
    cols = np.empty((op.rows, indices.size))
    basis = np.zeros(op.cols)
    for j, col in enumerate(indices):
        basis[col] = 1.0
        cols[:, j] = op.apply(basis)
        basis[col] = 0.0
    return cols


def _check_build_sizes(rows: int, cols: int):
    if rows < 1 or cols < 1:
        raise ValueError(f"operator sizes must be positive, got {rows}x{cols}")


def build_gaussian(rows: int, cols: int, seed: int) -> DenseOperator:
    """Dense operator with i.i.d. zero-mean Gaussian entries of variance 1/M.

    Each column then has unit expected squared norm. Deterministic in
    ``(rows, cols, seed)``.
    """
    _check_build_sizes(rows, cols)
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((rows, cols)) / np.sqrt(rows)
    return DenseOperator(mat, family="gaussian", seed=int(seed))


def build_bernoulli(rows: int, cols: int, seed: int) -> DenseOperator:
    """Dense operator with entries +-1/sqrt(M), equal probability.

    Every column has exactly unit norm. Deterministic in ``(rows, cols, seed)``.
    """
    _check_build_sizes(rows, cols)
    rng = np.random.default_rng(seed)
    mat = (2.0 * rng.integers(0, 2, size=(rows, cols)) - 1.0) / np.sqrt(rows)
    return DenseOperator(mat, family="bernoulli", seed=int(seed))


def build_partial_orthonormal(rows: int, cols: int, seed: int) -> SubsampledOrthonormalOperator:
    """Operator selecting M distinct rows of the orthonormal DCT-II matrix.

    Rows are drawn without replacement via a seeded shuffle prefix, then the
    map is scaled by sqrt(N/M). Requires ``rows <= cols``.
    """
    _check_build_sizes(rows, cols)
    if rows > cols:
        raise ValueError(f"cannot select {rows} distinct rows from a {cols}x{cols} transform")
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.permutation(cols)[:rows])
    return SubsampledOrthonormalOperator(picked, cols, seed=int(seed))


def restrict_columns(op: MeasurementOperator, gamma) -> ColumnRestriction:
    """Sub-operator formed by keeping only the columns indexed by ``gamma``."""
    return ColumnRestriction(op, gamma)


def rescale_for_rip(op: MeasurementOperator, delta: float) -> MeasurementOperator:
    """Divide the operator scale by sqrt(1 + delta).

    An operator whose s-sparse singular values squared lie in
    ``[1 - delta, 1 + delta]`` is mapped onto one satisfying the one-sided
    near-isometry with constant ``beta = 2*delta/(1 + delta)``.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    return op.with_scale(op.scale / np.sqrt(1.0 + delta))


_BUILDERS = {
    "gaussian": build_gaussian,
    "bernoulli": build_bernoulli,
    "partial_orthonormal": build_partial_orthonormal,
}


def to_descriptor(op: MeasurementOperator) -> dict:
    """JSON-ready descriptor ``{kind, M, N, seed, scale}``.

    Payloads are regenerated from the seed on load, never serialized raw, so
    only seeded builder kinds are supported.
    """
    if isinstance(op, DenseOperator) and op.family in _BUILDERS and op.seed is not None:
        kind = op.family
    elif isinstance(op, SubsampledOrthonormalOperator) and op.seed is not None:
        kind = "partial_orthonormal"
    else:
        raise ValueError(
            f"operator of kind '{op.kind}' was not built from a seed and cannot be serialized"
        )
    return {"kind": kind, "M": op.rows, "N": op.cols, "seed": int(op.seed), "scale": op.scale}


def from_descriptor(descriptor: dict) -> MeasurementOperator:
    """Rebuild an operator from a ``to_descriptor`` document."""
    try:
        kind = descriptor["kind"]
        rows = int(descriptor["M"])
        cols = int(descriptor["N"])
        seed = int(descriptor["seed"])
        scale = float(descriptor.get("scale", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed operator descriptor: {descriptor!r}") from exc
    if kind not in _BUILDERS:
        raise ValueError(f"unknown operator kind {kind!r}")
    op = _BUILDERS[kind](rows, cols, seed)
    return op if scale == 1.0 else op.with_scale(scale)
