"""Mask solvers: entropy-regularized plan, rounding, exact oracle, baselines and layer-wise pruning."""

from .dykstra import DykstraTrace, FractionalMask, dykstra_solve, marginal_violation
from .rounding import (
    FULL_PIPELINE,
    ROUNDING_VARIANTS,
    SolveResult,
    TransposableMaskSolver,
    complete_masks,
    greedy_round,
    local_search,
    simple_round,
    solve_blocks,
    solve_mask,
    swap_score,
)
from .exact import FlowNetwork, brute_force, count_feasible_masks, exact_solve, exact_solve_batch, relative_error
from .baselines import BaselineChoice, bi_nm, random_best, run_baseline, two_approximation
from .layerwise import (
    AdmmPruner,
    AdmmTrace,
    LayerProblem,
    LayerProjector,
    admm_prune,
    layer_from_activations,
    one_shot_prune,
    reconstruction_error,
    wanda_transform,
)

__all__ = [
    "DykstraTrace",
    "FractionalMask",
    "dykstra_solve",
    "marginal_violation",
    "FULL_PIPELINE",
    "ROUNDING_VARIANTS",
    "SolveResult",
    "TransposableMaskSolver",
    "complete_masks",
    "greedy_round",
    "local_search",
    "simple_round",
    "solve_blocks",
    "solve_mask",
    "swap_score",
    "FlowNetwork",
    "brute_force",
    "count_feasible_masks",
    "exact_solve",
    "exact_solve_batch",
    "relative_error",
    "BaselineChoice",
    "bi_nm",
    "random_best",
    "run_baseline",
    "two_approximation",
    "AdmmPruner",
    "AdmmTrace",
    "LayerProblem",
    "LayerProjector",
    "admm_prune",
    "layer_from_activations",
    "one_shot_prune",
    "reconstruction_error",
    "wanda_transform",
]
