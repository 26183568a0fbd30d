"""
Mask Solver Workflow
Dispatches matrices to the mask solvers and layers to the pruning methods.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..config.solver_profiles import AdmmConfig, DykstraConfig, RoundingConfig
from ..processors.baselines import bi_nm, random_best_batch, two_approximation
from ..processors.exact import exact_solve_batch
from ..processors.layerwise import AdmmPruner, LayerProblem, reconstruction_error, wanda_transform
from ..processors.rounding import TransposableMaskSolver
from .blocks import assemble_mask, check_feasible, mask_objective, partition_blocks
from .executor import BlockExecutor
from .types import BinaryMaskBatch, DenseMatrix, SparsityPattern

logger = logging.getLogger(__name__)

SOLVERS = ("tsenor", "exact", "greedy2", "binm", "random", "entropy")
UNDERFULL_SOLVERS = ("binm", "entropy")
PRUNE_METHODS = ("admm", "wanda", "magnitude")


@dataclass
class SolveSummary:
    """Outcome of one ``solve`` call."""

    solver: str
    pattern: SparsityPattern
    mask: DenseMatrix
    objective: float
    blocks: int
    completions: int
    feasible: bool
    wall_ms: float

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            "command": "solve",
            "solver": self.solver,
            "pattern": str(self.pattern),
            "rows": self.mask.rows,
            "cols": self.mask.cols,
            "blocks": self.blocks,
            "objective": self.objective,
            "completions": self.completions,
            "feasible": self.feasible,
            "wall_ms": round(self.wall_ms, 3) if include_timings else None,
        }


@dataclass
class PruneOutcome:
    """Pruned weights, their mask and a JSON-ready trace."""

    method: str
    weights: DenseMatrix
    mask: np.ndarray
    trace: Dict[str, Any] = field(default_factory=dict)


class MaskSolverWorkflow:
    """
    Front door for every solver and pruning method.
    """

    def __init__(
        self,
        dykstra_cfg: Optional[DykstraConfig] = None,
        rounding_cfg: Optional[RoundingConfig] = None,
        threads: int = 1,
        k: int = 1000,
        seed: int = 0,
    ):
        """
        Initialize the workflow.

        Args:
            dykstra_cfg: entropy solver settings
            rounding_cfg: rounding settings
            threads: worker threads for block-parallel stages (0 = all CPUs)
            k: sample count of the random baseline
            seed: seed of the random baseline
        """
        self.dykstra_cfg = dykstra_cfg or DykstraConfig()
        self.rounding_cfg = rounding_cfg or RoundingConfig()
        self.executor = BlockExecutor(threads)
        self.mask_solver = TransposableMaskSolver(self.dykstra_cfg, self.rounding_cfg, self.executor)
        self.k = k
        self.seed = seed
        logger.debug(f"Workflow initialized with {self.executor.workers} worker threads")

    def solve(self, matrix: DenseMatrix, pattern: SparsityPattern, solver: str = "tsenor") -> SolveSummary:
        """
        Compute a mask for ``matrix`` with one of SOLVERS.

        Raises:
            ValueError: unknown solver
            DimensionError: matrix not divisible by m
        """
        if solver not in SOLVERS:
            raise ValueError(f"Unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
        batch = partition_blocks(matrix, pattern)
        rows, cols = matrix.shape
        completions = 0

        logger.info(f"🧮 Solving {rows}x{cols} ({batch.b} blocks) at {pattern} with {solver}")
        start = time.perf_counter()
        if solver == "tsenor":
            result = self.mask_solver.solve(matrix, pattern)
            bits = result.mask
            completions = int(result.completions.sum())
        elif solver == "exact":
            bits, _ = exact_solve_batch(batch, pattern, self.executor)
        elif solver == "greedy2":
            bits = two_approximation(batch, pattern, self.executor)
        elif solver == "random":
            bits = random_best_batch(batch, pattern, self.k, self.seed, self.executor)
        elif solver == "entropy":
            bits = self.mask_solver.solve_blocks(batch, pattern, "entropy+simple").mask
        else:
            full = bi_nm(matrix, pattern)
            bits = BinaryMaskBatch(partition_blocks(full, pattern).magnitudes > 0.5)
        wall_ms = (time.perf_counter() - start) * 1000.0

        feasible = bool(check_feasible(bits, pattern, at_most=solver in UNDERFULL_SOLVERS))
        objective = mask_objective(batch, bits).objective
        if completions:
            logger.warning(f"Completion pass made {completions} moves to reach exact sums")
        logger.info(f"✅ Objective {objective:.6f} in {wall_ms:.1f} ms")
        return SolveSummary(
            solver=solver,
            pattern=pattern,
            mask=assemble_mask(bits, batch.origin, rows, cols),
            objective=objective,
            blocks=batch.b,
            completions=completions,
            feasible=feasible,
            wall_ms=wall_ms,
        )

    def prune(
        self,
        weights: DenseMatrix,
        pattern: SparsityPattern,
        method: str = "admm",
        layer: Optional[LayerProblem] = None,
        input_norms: Optional[np.ndarray] = None,
        admm_cfg: Optional[AdmmConfig] = None,
        show_progress: bool = False,
    ) -> PruneOutcome:
        """
        Prune ``weights`` (d_in × d_out) with one of PRUNE_METHODS.

        ``admm`` needs ``layer``; ``wanda`` needs ``input_norms`` or a ``layer`` to derive
        them from (‖X_:,i‖ = sqrt(H_ii − λ)); ``magnitude`` needs neither.
        """
        if method not in PRUNE_METHODS:
            raise ValueError(f"Unknown method {method!r}; choose from {', '.join(PRUNE_METHODS)}")
        logger.info(f"✂️  Pruning {weights.rows}x{weights.cols} layer at {pattern} with {method}")
        trace: Dict[str, Any] = {"command": "prune", "method": method, "pattern": str(pattern)}

        if method == "admm":
            if layer is None:
                raise ValueError("ADMM pruning needs a Gram matrix or activations")
            cfg = admm_cfg or AdmmConfig(dykstra_cfg=self.dykstra_cfg, rounding_cfg=self.rounding_cfg)
            pruner = AdmmPruner(cfg, executor=self.executor, show_progress=show_progress)
            pruned, admm_trace = pruner.prune(layer, pattern)
            mask = admm_trace.final_mask
            trace["admm"] = admm_trace.to_dict()
        else:
            scores = weights
            if method == "wanda":
                if input_norms is None:
                    if layer is None:
                        raise ValueError("Wanda pruning needs activation norms, activations or a Gram matrix")
                    input_norms = np.sqrt(np.clip(np.diag(layer.data_gram), 0.0, None))
                scores = wanda_transform(weights, input_norms)
            pruned, mask, result = self.mask_solver.mask_weights(scores, weights, pattern)
            trace["score_objective"] = result.objective
            trace["completions"] = int(result.completions.sum())

        if layer is not None:
            trace["reconstruction_error"] = reconstruction_error(layer, pruned)
        trace["kept"] = int(mask.sum())
        logger.info(f"✅ Kept {int(mask.sum())}/{mask.size} weights")
        return PruneOutcome(method=method, weights=pruned, mask=mask, trace=trace)

