"""Periodic-mean fractional Ornstein-Uhlenbeck processes."""

from ._core import (
    DomainError,
    ExperimentError,
    NumericalError,
    __version__,
    estimate,
    fgn_autocovariance,
    limit_matrix,
    quad_singular,
    read_path,
    run_config,
    sample_fgn,
    simulate,
    stationary_variance,
)

__all__ = [
    "DomainError",
    "ExperimentError",
    "NumericalError",
    "__version__",
    "estimate",
    "fgn_autocovariance",
    "limit_matrix",
    "quad_singular",
    "read_path",
    "run_config",
    "sample_fgn",
    "simulate",
    "stationary_variance",
]
