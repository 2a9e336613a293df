"""Matrix stochastic mirror descent solvers for low-rank matrix completion.

The heavy lifting lives in the C++ extension ``mirrormc._core``; this package
re-exports its public surface.
"""

from ._core import (
    ConfigError,
    ConstraintSystem,
    DimensionError,
    DivergenceError,
    FrobeniusMirror,
    InfeasibleError,
    MirrorMap,
    NumericalError,
    ObservationMask,
    PowerLoss,
    ProblemInstance,
    ScalarLoss,
    SchattenMirror,
    SquaredLoss,
    batch_gradient,
    bregman,
    estimate_L,
    fit_rate,
    full_loss,
    generate_instance,
    kkt_residual,
    min_frobenius_interpolator,
    relative_error,
    run_smd,
    run_soft_impute,
    run_svt,
    run_sweep,
    run_verify_suite,
    soft_threshold,
    three_point_check,
)

__all__ = [
    "ConfigError",
    "ConstraintSystem",
    "DimensionError",
    "DivergenceError",
    "FrobeniusMirror",
    "InfeasibleError",
    "MirrorMap",
    "NumericalError",
    "ObservationMask",
    "PowerLoss",
    "ProblemInstance",
    "ScalarLoss",
    "SchattenMirror",
    "SquaredLoss",
    "batch_gradient",
    "bregman",
    "estimate_L",
    "fit_rate",
    "full_loss",
    "generate_instance",
    "kkt_residual",
    "min_frobenius_interpolator",
    "relative_error",
    "run_smd",
    "run_soft_impute",
    "run_svt",
    "run_sweep",
    "run_verify_suite",
    "soft_threshold",
    "three_point_check",
]
