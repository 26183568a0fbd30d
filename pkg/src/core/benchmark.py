"""
Benchmark harness: relative error of every solver against the exact oracle on
synthetic blocks, and the rounding ablation sweep over a set of patterns.

All solvers of one pattern run on the same sampled blocks (paired comparison). Only
the solver call sits inside the stopwatch; sampling, the oracle and the feasibility
checks do not.
"""

import logging
import math
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..config.solver_profiles import DykstraConfig, RoundingConfig
from ..processors.baselines import bi_nm_blocks, random_best_batch, two_approximation
from ..processors.exact import MAX_FLOW_SIDE, exact_solve_batch
from ..processors.rounding import FULL_PIPELINE, ROUNDING_VARIANTS, solve_blocks
from ..utils.reports import BenchReport, SolverRecord
from .blocks import check_feasible, mask_objective
from .exceptions import SizeError
from .executor import BlockExecutor
from .types import BinaryMaskBatch, BlockBatch, SparsityPattern

logger = logging.getLogger(__name__)

DISTRIBUTIONS = ("gaussian", "uniform", "laplace")

BENCH_SOLVERS = ("tsenor", "exact", "greedy2", "binm", "random", "entropy")

STANDARD_PATTERNS: Tuple[SparsityPattern, ...] = tuple(
    SparsityPattern(n, m)
    for n, m in ((4, 8), (3, 8), (6, 16), (8, 16), (4, 16), (12, 32), (16, 32), (8, 32))
)

# relative objective gain that counts as an improvement in the sweep table
IMPROVEMENT_TOLERANCE = 1e-12


def sample_blocks(count: int, pattern: SparsityPattern, distribution: str = "gaussian", seed: int = 0) -> BlockBatch:
    """
    Draw ``count`` m×m magnitude blocks.

    The stream depends only on (seed, n, m), so every solver and every thread count
    sees the same blocks.

    Raises:
        ValueError: unknown distribution or count < 1
    """
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"Unknown distribution {distribution!r}; choose from {', '.join(DISTRIBUTIONS)}")
    if count < 1:
        raise ValueError(f"Block count must be >= 1, got {count}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, pattern.n, pattern.m]))
    shape = (count, pattern.m, pattern.m)
    if distribution == "gaussian":
        values = rng.standard_normal(shape)
    elif distribution == "uniform":
        values = rng.uniform(-1.0, 1.0, shape)
    else:
        values = rng.laplace(0.0, 1.0, shape)
    return BlockBatch.from_blocks(np.abs(values))


@dataclass(frozen=True)
class SweepSpec:
    """Patterns × rounding variants of one ablation sweep."""

    patterns: Tuple[SparsityPattern, ...] = STANDARD_PATTERNS
    block_count: int = 100
    distribution: str = "gaussian"
    variants: Tuple[str, ...] = tuple(ROUNDING_VARIANTS)

    def __post_init__(self):
        if not self.patterns:
            raise ValueError("A sweep needs at least one pattern")
        if self.block_count < 1:
            raise ValueError(f"block_count must be >= 1, got {self.block_count}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"Unknown distribution {self.distribution!r}")
        unknown = [v for v in self.variants if v not in ROUNDING_VARIANTS]
        if unknown or not self.variants:
            raise ValueError(f"Unknown sweep variants {unknown}; choose from {', '.join(ROUNDING_VARIANTS)}")
        for pattern in self.patterns:
            _check_oracle_size(pattern)


def _check_oracle_size(pattern: SparsityPattern) -> None:
    if pattern.m > MAX_FLOW_SIDE:
        raise SizeError(f"Exact oracle supports M <= {MAX_FLOW_SIDE}, got {pattern}")


@dataclass
class SolverRun:
    """Per-block outcome of one solver on one batch."""

    name: str
    mask: BinaryMaskBatch
    objectives: np.ndarray
    wall_ms: float
    feasible: bool


def underfull_allowed(name: str) -> bool:
    """Bi-NM and simple rounding are only held to the ≤ n form."""
    return name in ("binm", "entropy") or name.endswith("+simple")


def _solver_fn(
    name: str,
    pattern: SparsityPattern,
    dcfg: DykstraConfig,
    rcfg: RoundingConfig,
    executor: BlockExecutor,
    k: int,
    seed: int,
) -> Callable[[BlockBatch], BinaryMaskBatch]:
    if name in ROUNDING_VARIANTS:
        return lambda batch: solve_blocks(batch, pattern, dcfg, rcfg, executor, name).mask
    if name == "tsenor":
        return lambda batch: solve_blocks(batch, pattern, dcfg, rcfg, executor, FULL_PIPELINE).mask
    if name == "entropy":
        return lambda batch: solve_blocks(batch, pattern, dcfg, rcfg, executor, "entropy+simple").mask
    if name == "greedy2":
        return lambda batch: two_approximation(batch, pattern, executor)
    if name == "binm":
        return lambda batch: bi_nm_blocks(batch, pattern)
    if name == "random":
        return lambda batch: random_best_batch(batch, pattern, k, seed, executor)
    if name == "exact":
        return lambda batch: exact_solve_batch(batch, pattern, executor)[0]
    raise ValueError(
        f"Unknown solver {name!r}; choose from {', '.join(BENCH_SOLVERS + tuple(ROUNDING_VARIANTS))}"
    )


def run_solver(
    name: str,
    batch: BlockBatch,
    pattern: SparsityPattern,
    dcfg: Optional[DykstraConfig] = None,
    rcfg: Optional[RoundingConfig] = None,
    executor: Optional[BlockExecutor] = None,
    k: int = 1000,
    seed: int = 0,
) -> SolverRun:
    """Run one bench solver or rounding variant with a solver-only stopwatch."""
    fn = _solver_fn(
        name, pattern, dcfg or DykstraConfig(), rcfg or RoundingConfig(), executor or BlockExecutor(1), k, seed
    )
    start = time.perf_counter()
    mask = fn(batch)
    wall_ms = (time.perf_counter() - start) * 1000.0
    feasible = bool(check_feasible(mask, pattern, at_most=underfull_allowed(name)))
    if not feasible:
        logger.warning(f"{name} produced infeasible masks at {pattern}")
    return SolverRun(
        name=name,
        mask=mask,
        objectives=mask_objective(batch, mask).per_block,
        wall_ms=wall_ms,
        feasible=feasible,
    )


def _oracle_objectives(batch: BlockBatch, pattern: SparsityPattern, executor: BlockExecutor) -> np.ndarray:
    # same summation as the candidates, so the oracle scores itself as exact
    masks, _ = exact_solve_batch(batch, pattern, executor)
    return mask_objective(batch, masks).per_block


def relative_errors(objectives: np.ndarray, optimal: np.ndarray) -> np.ndarray:
    """Per-block (f* − f)/f*; blocks with a zero optimum count as exact."""
    optimal = np.asarray(optimal, dtype=np.float64)
    safe = np.where(optimal > 0, optimal, 1.0)
    return np.where(optimal > 0, (optimal - objectives) / safe, 0.0)


def _record(run: SolverRun, pattern: SparsityPattern, optimal: np.ndarray, seed: int) -> SolverRecord:
    errors = relative_errors(run.objectives, optimal)
    b = len(errors)
    return SolverRecord(
        solver=run.name,
        pattern=str(pattern),
        blocks=b,
        mean_relative_error=math.fsum(errors.tolist()) / b,
        max_relative_error=float(errors.max()),
        mean_objective=math.fsum(run.objectives.tolist()) / b,
        wall_ms=run.wall_ms,
        seed=seed,
        feasible=run.feasible,
    )


def _log_record(record: SolverRecord) -> None:
    logger.info(
        f"   {record.solver:<18} {record.pattern:>6}  mean {record.mean_relative_error:.5f}  "
        f"max {record.max_relative_error:.5f}  {record.wall_ms:9.1f} ms"
    )


def run_bench(
    pattern: SparsityPattern,
    solvers: Sequence[str],
    block_count: int = 100,
    distribution: str = "gaussian",
    seed: int = 0,
    dcfg: Optional[DykstraConfig] = None,
    rcfg: Optional[RoundingConfig] = None,
    executor: Optional[BlockExecutor] = None,
    k: int = 1000,
) -> BenchReport:
    """
    Compare ``solvers`` against the exact oracle on ``block_count`` sampled blocks.

    Args:
        pattern: N:M pattern
        solvers: names from BENCH_SOLVERS or rounding variants
        block_count: number of m×m blocks
        distribution: magnitude distribution (see DISTRIBUTIONS)
        seed: sampling seed, also the random baseline's seed
        dcfg: Dykstra settings
        rcfg: rounding settings
        executor: block-parallel executor
        k: random baseline sample count

    Returns:
        BenchReport with one record per solver, in the order given

    Raises:
        SizeError: m above the oracle limit
        ValueError: unknown solver or distribution
    """
    _check_oracle_size(pattern)
    if not solvers:
        raise ValueError("At least one solver is required")
    for name in solvers:
        _solver_fn(name, pattern, DykstraConfig(), RoundingConfig(), BlockExecutor(1), k, seed)
    executor = executor or BlockExecutor(1)

    batch = sample_blocks(block_count, pattern, distribution, seed)
    logger.info(f"📊 Benchmarking {len(solvers)} solvers on {block_count} {distribution} blocks at {pattern}")
    optimal = _oracle_objectives(batch, pattern, executor)

    report = BenchReport(distribution=distribution, seed=seed)
    for name in solvers:
        run = run_solver(name, batch, pattern, dcfg, rcfg, executor, k, seed)
        record = _record(run, pattern, optimal, seed)
        report.records.append(record)
        _log_record(record)
    return report


def run_sweep(
    spec: SweepSpec,
    seed: int = 0,
    dcfg: Optional[DykstraConfig] = None,
    rcfg: Optional[RoundingConfig] = None,
    executor: Optional[BlockExecutor] = None,
    show_progress: bool = False,
) -> BenchReport:
    """
    Full factorial of ``spec.patterns`` × ``spec.variants``.

    Cells run one after another; blocks inside a cell run on the executor. Every
    "+ls" variant whose base variant is also in the sweep gets ``improved_fraction``:
    the share of blocks where local search raised the objective.
    """
    executor = executor or BlockExecutor(1)
    report = BenchReport(distribution=spec.distribution, seed=seed)
    cells = [(p, v) for p in spec.patterns for v in spec.variants]
    logger.info(
        f"🔬 Sweep: {len(spec.patterns)} patterns × {len(spec.variants)} variants, "
        f"{spec.block_count} {spec.distribution} blocks each"
    )

    progress = tqdm(total=len(cells), desc="Sweep", disable=not show_progress, file=sys.stderr)
    for pattern in spec.patterns:
        batch = sample_blocks(spec.block_count, pattern, spec.distribution, seed)
        optimal = _oracle_objectives(batch, pattern, executor)
        runs: Dict[str, SolverRun] = {}
        for variant in spec.variants:
            runs[variant] = run_solver(variant, batch, pattern, dcfg, rcfg, executor, seed=seed)
            progress.update(1)

        for variant in spec.variants:
            record = _record(runs[variant], pattern, optimal, seed)
            base = variant[: -len("+ls")] if variant.endswith("+ls") else None
            if base in runs:
                gain = runs[variant].objectives - runs[base].objectives
                threshold = IMPROVEMENT_TOLERANCE * np.maximum(optimal, 1.0)
                record.improved_fraction = float(np.count_nonzero(gain > threshold)) / batch.b
            report.records.append(record)
            _log_record(record)
    progress.close()
    return report
