"""Sparse phase retrieval with hypentropy mirror descent, EG+- and HWF."""

from ._core import (
    Algorithm,
    ConfigError,
    DegenerateInstanceError,
    DimensionError,
    HypentropyMap,
    MeasurementSet,
    SolverConfig,
    SparseSignal,
    StageReport,
    StepScale,
    Storage,
    bregman,
    dist,
    dist_bregman,
    empirical_gradient,
    empirical_risk,
    estimate_signal_size,
    estimate_support_coordinate,
    generate_measurements,
    generate_signal,
    population_gradient,
    run,
    run_beta_sweep,
    run_m_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
