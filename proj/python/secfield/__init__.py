"""Random-field wiretap coding: replica analysis, exact MMSE decoding, simulation."""

from ._secfield import (
    BracketError,
    CodecConfig,
    ConfigError,
    DomainError,
    GaussianField,
    InputError,
    ResourceError,
    awgn_capacity,
    critical_rate_heuristic,
    estimate_leakage,
    key_length,
    locate_critical_rate,
    mmse,
    run_experiment,
    sample_field,
    scan_rates,
    secrecy_capacity,
    solve_overlap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
