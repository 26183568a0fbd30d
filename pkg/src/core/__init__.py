"""Core types, block operations and the solver workflow."""

from .types import BinaryMaskBatch, BlockBatch, DenseMatrix, MaskObjectiveReport, SparsityPattern
from .exceptions import TnmError
from .blocks import assemble_mask, check_feasible, mask_objective, partition_blocks
from .executor import BlockExecutor

__all__ = [
    "BinaryMaskBatch",
    "BlockBatch",
    "DenseMatrix",
    "MaskObjectiveReport",
    "SparsityPattern",
    "TnmError",
    "assemble_mask",
    "check_feasible",
    "mask_objective",
    "partition_blocks",
    "BlockExecutor",
]
