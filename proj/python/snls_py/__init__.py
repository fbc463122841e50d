"""Python access to the snls simulator core."""

from ._core import (
    ConfigError,
    RunConfig,
    convergence_study,
    dpd_nonlinearity,
    load_config,
    noise_statistics,
    parse_config,
    simulate,
    version,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "convergence_study",
    "dpd_nonlinearity",
    "load_config",
    "noise_statistics",
    "parse_config",
    "simulate",
    "version",
]
