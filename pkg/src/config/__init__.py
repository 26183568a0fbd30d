"""Configuration module for the transposable N:M mask toolkit."""

from .settings import AppSettings
from .solver_profiles import (
    SOLVER_PRESETS,
    AdmmConfig,
    DykstraConfig,
    RoundingConfig,
    SolverPreset,
    get_preset,
    list_presets,
)

__all__ = [
    "AppSettings",
    "AdmmConfig",
    "DykstraConfig",
    "RoundingConfig",
    "SOLVER_PRESETS",
    "SolverPreset",
    "get_preset",
    "list_presets",
]
