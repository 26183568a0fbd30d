"""
Entropy-regularized capacitated transport solver.

Each M×M block is relaxed to the transport problem "N units out of every row, N units
into every column, at most 1 per cell" and smoothed with an entropy term. Dykstra's
cyclic Bregman projections onto the row set, the column set and the capacity box then
reduce to row/column log-normalizations plus a clamp with a dual correction. All
iterates live in log-space.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from ..config.solver_profiles import DykstraConfig
from ..core.exceptions import NumericalError, ShapeError
from ..core.types import BlockBatch, SparsityPattern

logger = logging.getLogger(__name__)


@dataclass
class DykstraTrace:
    """
    Per-sweep diagnostics; every list entry is a length-b array.

    Attributes:
        row_error_after_rows: max |row_sum − n| right after the row normalization
        max_after_capacity: largest plan entry right after the capacity clamp
        row_violation: max |row_sum − n| at the end of the sweep
        col_violation: max |col_sum − n| at the end of the sweep
        dual_objective: value of the dual of the regularized problem (non-decreasing)
        transport: ⟨S, |W|⟩ at the end of the sweep
    """

    row_error_after_rows: List[np.ndarray] = field(default_factory=list)
    max_after_capacity: List[np.ndarray] = field(default_factory=list)
    row_violation: List[np.ndarray] = field(default_factory=list)
    col_violation: List[np.ndarray] = field(default_factory=list)
    dual_objective: List[np.ndarray] = field(default_factory=list)
    transport: List[np.ndarray] = field(default_factory=list)

    def as_array(self, name: str) -> np.ndarray:
        """Stack one series into a (sweeps, b) array."""
        return np.stack(getattr(self, name)) if getattr(self, name) else np.empty((0, 0))


@dataclass(frozen=True)
class FractionalMask:
    """
    Fractional transport plans, one per block, stored as log-values.

    Attributes:
        log_values: (b, m, m) log S, every entry ≤ 0
        log_dual: (b, m, m) log Q of the capacity constraint, every entry ≥ 0
        tau: (b,) regularization strength used for each block
        sweeps: (b,) number of sweeps each block ran before freezing
        trace: diagnostics, present when requested
    """

    log_values: np.ndarray
    log_dual: np.ndarray
    tau: np.ndarray
    sweeps: np.ndarray
    trace: Optional[DykstraTrace] = None

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def b(self) -> int:
        return self.log_values.shape[0]

    @property
    def m(self) -> int:
        return self.log_values.shape[1]


def block_tau(magnitudes: np.ndarray, config: DykstraConfig) -> np.ndarray:
    """
    Per-block regularization strength.

    Scale-invariant mode: τ = tau_scale / max_block|W| (0 for an all-zero block).
    Absolute mode: τ = absolute_coefficient · max_block|W|.
    """
    peak = magnitudes.reshape(magnitudes.shape[0], -1).max(axis=1)
    if config.tau_absolute:
        return config.absolute_coefficient * peak
    return np.divide(config.tau_scale, peak, out=np.zeros_like(peak), where=peak > 0)


def _initial_log_plan(magnitudes: np.ndarray, config: DykstraConfig) -> np.ndarray:
    peak = magnitudes.reshape(magnitudes.shape[0], -1).max(axis=1)
    if config.tau_absolute:
        tau = config.absolute_coefficient * peak
        return tau[:, None, None] * magnitudes
    # τ|W| = c · (|W| / max|W|); the ratio form keeps rescaled blocks bit-identical
    ratio = np.divide(
        magnitudes, peak[:, None, None], out=np.zeros_like(magnitudes), where=peak[:, None, None] > 0
    )
    return config.tau_scale * ratio


def _violations(plan: np.ndarray, n: int):
    row = np.abs(plan.sum(axis=2) - n).max(axis=1)
    col = np.abs(plan.sum(axis=1) - n).max(axis=1)
    return row, col


def _dual_objective(log_s, log_q, scaled, n, m) -> np.ndarray:
    # log S = τ|W| + a_i + b_j − log Q, so Σ_ij (log S − τ|W| + log Q) = m(Σa + Σb)
    potentials = (log_s - scaled + log_q).sum(axis=(1, 2))
    return -np.exp(log_s).sum(axis=(1, 2)) + (n / m) * potentials - log_q.sum(axis=(1, 2))


def dykstra_solve(
    batch: BlockBatch,
    pattern: SparsityPattern,
    config: Optional[DykstraConfig] = None,
    record_trace: bool = False,
) -> FractionalMask:
    """
    Run the log-domain Dykstra iteration on every block of ``batch``.

    Blocks whose row and column violations both fall below ``config.marginal_tol`` are
    frozen; the remaining blocks keep iterating until ``config.max_iters`` sweeps.

    Args:
        batch: magnitude blocks
        pattern: N:M pattern; ``pattern.m`` must equal the block side
        config: solver settings (defaults if omitted)
        record_trace: collect per-sweep diagnostics

    Returns:
        FractionalMask with values in [0, 1]

    Raises:
        ShapeError: if the pattern does not match the block side
        NumericalError: if τ|W| overflows or an iterate turns NaN
    """
    config = config or DykstraConfig()
    if pattern.m != batch.m:
        raise ShapeError(f"Pattern {pattern} does not match block side {batch.m}")

    n, m, b = pattern.n, batch.m, batch.b
    magnitudes = batch.magnitudes
    scaled = _initial_log_plan(magnitudes, config)
    if not np.isfinite(scaled).all():
        raise NumericalError("τ|W| overflowed; use the scale-invariant τ mode for these magnitudes")

    log_s = scaled.copy()
    log_q = np.zeros_like(log_s)
    log_n = np.log(n)
    sweeps = np.zeros(b, dtype=np.int64)
    active = np.ones(b, dtype=bool)
    trace = DykstraTrace() if record_trace else None

    for sweep in range(config.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        s = log_s[idx]
        q = log_q[idx]

        s -= logsumexp(s, axis=2, keepdims=True) - log_n
        if trace is not None:
            row_err = np.zeros(b)
            row_err[idx] = np.abs(np.exp(s).sum(axis=2) - n).max(axis=1)
            trace.row_error_after_rows.append(row_err)

        s -= logsumexp(s, axis=1, keepdims=True) - log_n

        tmp = s + q
        s = np.minimum(tmp, 0.0)
        q = tmp - s

        if np.isnan(s).any():
            raise NumericalError(f"Dykstra iterate became NaN at sweep {sweep + 1}")

        log_s[idx] = s
        log_q[idx] = q
        sweeps[idx] += 1

        plan = np.exp(s)
        row_v, col_v = _violations(plan, n)
        if config.marginal_tol > 0:
            done = (row_v < config.marginal_tol) & (col_v < config.marginal_tol)
            active[idx[done]] = False

        if trace is not None:
            full_plan = np.exp(log_s)
            row_all, col_all = _violations(full_plan, n)
            trace.max_after_capacity.append(full_plan.reshape(b, -1).max(axis=1))
            trace.row_violation.append(row_all)
            trace.col_violation.append(col_all)
            trace.dual_objective.append(_dual_objective(log_s, log_q, scaled, n, m))
            trace.transport.append((full_plan * magnitudes).sum(axis=(1, 2)))

    if active.any() and config.marginal_tol > 0:
        logger.warning(
            f"{int(active.sum())}/{b} blocks hit the {config.max_iters}-sweep cap "
            f"above marginal_tol={config.marginal_tol:g}"
        )

    return FractionalMask(
        log_values=log_s,
        log_dual=log_q,
        tau=block_tau(magnitudes, config),
        sweeps=sweeps,
        trace=trace,
    )


def marginal_violation(frac: FractionalMask, pattern: SparsityPattern) -> np.ndarray:
    """
    Max-abs row and column marginal deviations per block.

    Returns:
        (b, 2) array of (row_violation, col_violation)
    """
    row, col = _violations(frac.values, pattern.n)
    return np.stack([row, col], axis=1)
