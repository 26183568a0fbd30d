"""
Solver configurations and named presets.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional


@dataclass(frozen=True)
class DykstraConfig:
    """
    Entropy-regularized transport solver settings.

    Attributes:
        tau_scale: c in τ = c / max_block|W| (scale-invariant mode)
        max_iters: sweep cap T
        marginal_tol: per-block early-stop threshold on row/column violation (0 disables)
        tau_absolute: use τ = absolute_coefficient · max_block|W| instead
        absolute_coefficient: coefficient of the absolute mode
    """

    tau_scale: float = 200.0
    max_iters: int = 300
    marginal_tol: float = 1e-4
    tau_absolute: bool = False
    absolute_coefficient: float = 0.005

    def __post_init__(self):
        if not self.tau_scale > 0:
            raise ValueError(f"tau_scale must be positive, got {self.tau_scale}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.marginal_tol < 0:
            raise ValueError(f"marginal_tol must be >= 0, got {self.marginal_tol}")
        if not self.absolute_coefficient > 0:
            raise ValueError(f"absolute_coefficient must be positive, got {self.absolute_coefficient}")


@dataclass(frozen=True)
class RoundingConfig:
    """
    Attributes:
        local_search_steps: swap budget L per block
        complete: run the completion pass so every block ends with exact sums
    """

    local_search_steps: int = 10
    complete: bool = True

    def __post_init__(self):
        if self.local_search_steps < 0:
            raise ValueError(f"local_search_steps must be >= 0, got {self.local_search_steps}")


@dataclass(frozen=True)
class AdmmConfig:
    """
    Layer-wise ADMM settings.

    ``rho0=None`` resolves to 0.1 · mean(diag(H)) for the layer being pruned.
    """

    rho0: Optional[float] = None
    growth: float = 1.03
    max_iters: int = 300
    primal_tol: float = 1e-4
    dykstra_cfg: DykstraConfig = field(default_factory=DykstraConfig)
    rounding_cfg: RoundingConfig = field(default_factory=RoundingConfig)

    def __post_init__(self):
        if self.rho0 is not None and not self.rho0 > 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if not self.growth > 1:
            raise ValueError(f"growth must be > 1, got {self.growth}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.primal_tol > 0:
            raise ValueError(f"primal_tol must be positive, got {self.primal_tol}")


@dataclass(frozen=True)
class SolverPreset:
    """A named bundle of Dykstra and rounding settings."""

    name: str
    description: str
    dykstra: DykstraConfig
    rounding: RoundingConfig


SOLVER_PRESETS: Dict[str, SolverPreset] = {
    "default": SolverPreset(
        name="default",
        description="τ scale 200, 300 sweeps, 10 local-search steps.",
        dykstra=DykstraConfig(),
        rounding=RoundingConfig(),
    ),
    "fast": SolverPreset(
        name="fast",
        description="Fewer sweeps for quick runs; slightly looser fractional plans.",
        dykstra=DykstraConfig(max_iters=100),
        rounding=RoundingConfig(local_search_steps=10),
    ),
    "precise": SolverPreset(
        name="precise",
        description="Sharper regularization and a longer search budget.",
        dykstra=DykstraConfig(tau_scale=800.0, max_iters=1000),
        rounding=RoundingConfig(local_search_steps=50),
    ),
}


def get_preset(name: str) -> SolverPreset:
    """
    Get a solver preset by name.

    Args:
        name: Preset name

    Returns:
        SolverPreset

    Raises:
        ValueError: if the preset is unknown
    """
    if name not in SOLVER_PRESETS:
        raise ValueError(f"Unknown preset {name!r}; choose from {', '.join(list_presets())}")
    return SOLVER_PRESETS[name]


def list_presets() -> List[str]:
    """Names of all available presets."""
    return list(SOLVER_PRESETS.keys())


def override(config, **changes):
    """``dataclasses.replace`` that ignores ``None`` values (unset CLI flags)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, **changes) if changes else config
