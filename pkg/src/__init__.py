"""
Transposable N:M Mask Toolkit

Transposable N:M sparsity masks for weight matrices: entropy-regularized solver with
greedy rounding and local search, exact oracle, baselines and layer-wise ADMM pruning.
"""

__version__ = "1.0.0"

from .core.types import SparsityPattern, DenseMatrix
from .core.workflow import MaskSolverWorkflow

__all__ = ["MaskSolverWorkflow", "SparsityPattern", "DenseMatrix"]
