"""Matrix-free iterative hard thresholding for sparse recovery.

The package splits into five pieces: ``operators`` (forward/adjoint sampling
maps), ``signals`` (sparsity and compressibility utilities), ``iht`` (the
solver and its accuracy bounds), ``rip`` (isometry-constant computation and
the supporting inequality checks), and ``bench`` (seeded experiment sweeps
with CSV output, also exposed through the ``ihtkit`` command-line tool).
"""

from .operators import (
    ColumnRestriction,
    CountingOperator,
    DenseOperator,
    DimensionMismatchError,
    MeasurementOperator,
    ShapeWarning,
    SubsampledOrthonormalOperator,
    as_index_set,
    build_bernoulli,
    build_gaussian,
    build_partial_orthonormal,
    from_descriptor,
    materialize_columns,
    rescale_for_rip,
    restrict_columns,
    to_descriptor,
)
from .signals import (
    CompressibleSpec,
    as_signal,
    best_s_error,
    compressible_tail_bounds,
    epsilon_tilde,
    gen_compressible,
    hard_threshold,
    load_signal_binary,
    load_signal_csv,
    save_signal_binary,
    save_signal_csv,
    support,
)
from .iht import (
    BoundInputs,
    IhtConfig,
    IhtState,
    NumericError,
    RecoveryReport,
    TracePoint,
    UnboundedIterationsError,
    error_bound_exact_sparse,
    error_bound_general,
    iht_step,
    initial_state,
    predicted_iterations,
    residual_tol_for_accuracy,
    run,
    stopping_error_bound,
)
from .rip import (
    DEFAULT_ENUMERATION_BUDGET,
    EnumerationBudgetError,
    RipEstimate,
    beta_to_delta,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    delta_to_beta,
    effective_noise_norm,
    estimate_beta,
    exact_beta,
)
from .bench import (
    ConfigError,
    ExperimentConfig,
    RankDeficiencyWarning,
    TraceRow,
    TrialRecord,
    oracle_recover,
    run_convergence_trace,
    run_noise_sweep,
    run_phase_transition,
)

__version__ = "0.1.0"
