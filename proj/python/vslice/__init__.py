"""Sliced vehicular downlink simulator (C++ core)."""

from ._vslice import (
    ConfigError,
    ContractViolation,
    __version__,
    beam_gain,
    beamforming_loss,
    bler,
    canonical_corr,
    default_config,
    dft_codebook,
    effective_mi,
    estimate_mi,
    los_gain,
    mi_per_rb,
    noise_power_w,
    optimal_beam,
    path_loss_db,
    run,
    run_plan,
    simulate,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "__version__",
    "beam_gain",
    "beamforming_loss",
    "bler",
    "canonical_corr",
    "default_config",
    "dft_codebook",
    "effective_mi",
    "estimate_mi",
    "los_gain",
    "mi_per_rb",
    "noise_power_w",
    "optimal_beam",
    "path_loss_db",
    "run",
    "run_plan",
    "simulate",
]
