"""Grid filters with truncated likelihoods, reshaped kernels and stability diagnostics."""

from ._core import (
    TruncFilterError,
    cli,
    densify,
    dq,
    expected_normalizer,
    kalman,
    metric_axioms,
    run_filter,
    simulate,
    stability,
    truncate,
)

__all__ = [
    "TruncFilterError",
    "cli",
    "densify",
    "dq",
    "expected_normalizer",
    "kalman",
    "metric_axioms",
    "run_filter",
    "simulate",
    "stability",
    "truncate",
]
