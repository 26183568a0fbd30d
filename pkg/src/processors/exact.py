"""
Exact oracles for the transposable N:M mask problem.

``exact_solve`` runs min-cost flow on the bipartite network source → rows → columns →
sink with successive shortest augmenting paths and node potentials, batched across
blocks in 64-bit integer arithmetic. ``brute_force`` is an independent branch-and-bound
enumerator for small blocks, used to cross-check the flow solver.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from ..core.blocks import fill_rows_by_priority
from ..core.exceptions import DegenerateError, ScaleError, ShapeError, SizeError
from ..core.executor import BlockExecutor
from ..core.types import BinaryMaskBatch, BlockBatch, SparsityPattern

logger = logging.getLogger(__name__)

COST_SCALE = 10 ** 9
MAX_SCALED_COST = 2 ** 40
MAX_FLOW_SIDE = 512
MAX_BRUTE_FORCE_SIDE = 8

_INF = 2 ** 60
_UNSET = 2 ** 62


@dataclass(frozen=True)
class FlowNetwork:
    """
    Integer min-cost-flow networks, one per block.

    Node numbering: source 0, rows 1..m, columns m+1..2m, sink 2m+1.
    Arcs: source→row (capacity n, cost 0), row→column (capacity 1, cost −round(|W|·1e9)),
    column→sink (capacity n, cost 0).
    """

    n: int
    m: int
    costs: np.ndarray  # (b, m, m) int64, ≤ 0

    @classmethod
    def from_blocks(cls, magnitudes: np.ndarray, pattern: SparsityPattern) -> "FlowNetwork":
        """
        Raises:
            SizeError: if the block side exceeds MAX_FLOW_SIDE
            ScaleError: if round(max|W|·1e9) exceeds 2^40
        """
        magnitudes = np.asarray(magnitudes, dtype=np.float64)
        if magnitudes.ndim == 2:
            magnitudes = magnitudes[None]
        m = magnitudes.shape[1]
        if m != pattern.m:
            raise ShapeError(f"Pattern {pattern} does not match block side {m}")
        if m > MAX_FLOW_SIDE:
            raise SizeError(f"Block side {m} exceeds the exact oracle limit of {MAX_FLOW_SIDE}")
        peak = float(magnitudes.max(initial=0.0))
        if round(peak * COST_SCALE) > MAX_SCALED_COST:
            raise ScaleError(
                f"max|W| = {peak:g} exceeds the integer cost range of the exact oracle "
                f"({MAX_SCALED_COST / COST_SCALE:g})"
            )
        costs = -np.rint(magnitudes * COST_SCALE).astype(np.int64)
        return cls(pattern.n, m, costs)

    @property
    def b(self) -> int:
        return self.costs.shape[0]

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return 2 * self.m + 1

    @property
    def supply(self) -> int:
        return self.n * self.m

    def arcs(self, block: int = 0) -> List[Tuple[int, int, int, int]]:
        """(tail, head, capacity, cost) for every arc of one block's network."""
        m, n = self.m, self.n
        out = [(self.source, 1 + i, n, 0) for i in range(m)]
        out += [(1 + i, 1 + m + j, 1, int(self.costs[block, i, j])) for i in range(m) for j in range(m)]
        out += [(1 + m + j, self.sink, n, 0) for j in range(m)]
        return out


def _lexicographic_first(count: int, pattern: SparsityPattern) -> np.ndarray:
    m = pattern.m
    priority = np.broadcast_to(-np.arange(m, dtype=np.float64), (count, m, m))
    return fill_rows_by_priority(priority, pattern.n)


def _min_cost_flow(network: FlowNetwork) -> np.ndarray:
    """Successive shortest paths with potentials on every block at once."""
    n, m, b = network.n, network.m, network.b
    # shift by the per-block max so every row→column cost is ≥ 0; each source→sink path
    # crosses one more forward than backward middle arc, so optima are unchanged
    shift = (-network.costs).reshape(b, -1).max(axis=1)
    cost = network.costs + shift[:, None, None]

    flow = np.zeros((b, m, m), dtype=bool)
    out_rows = np.zeros((b, m), dtype=np.int64)
    in_cols = np.zeros((b, m), dtype=np.int64)
    pi_row = np.zeros((b, m), dtype=np.int64)
    pi_col = np.zeros((b, m), dtype=np.int64)
    pi_sink = np.zeros(b, dtype=np.int64)
    lanes = np.arange(b)

    for _ in range(n * m):
        dist_row = np.where(out_rows < n, -pi_row, _INF)
        dist_col = np.full((b, m), _INF, dtype=np.int64)
        pred_row = np.full((b, m), -1, dtype=np.int64)  # column index, -1 = source
        pred_col = np.full((b, m), -1, dtype=np.int64)  # row index
        done_row = np.zeros((b, m), dtype=bool)
        done_col = np.zeros((b, m), dtype=bool)

        for _ in range(2 * m):
            pool = np.concatenate(
                [np.where(done_row, _UNSET, dist_row), np.where(done_col, _UNSET, dist_col)], axis=1
            )
            node = np.argmin(pool, axis=1)
            value = pool[lanes, node]
            live = value < _INF
            if not live.any():
                break

            is_row = live & (node < m)
            if is_row.any():
                k = lanes[is_row]
                i = node[is_row]
                done_row[k, i] = True
                reduced = cost[k, i, :] + pi_row[k, i][:, None] - pi_col[k]
                cand = value[is_row][:, None] + reduced
                better = ~flow[k, i, :] & ~done_col[k] & (cand < dist_col[k])
                dist_col[k] = np.where(better, cand, dist_col[k])
                pred_col[k] = np.where(better, i[:, None], pred_col[k])

            is_col = live & (node >= m)
            if is_col.any():
                k = lanes[is_col]
                j = node[is_col] - m
                done_col[k, j] = True
                reduced = -cost[k, :, j] + pi_col[k, j][:, None] - pi_row[k]
                cand = value[is_col][:, None] + reduced
                better = flow[k, :, j] & ~done_row[k] & (cand < dist_row[k])
                dist_row[k] = np.where(better, cand, dist_row[k])
                pred_row[k] = np.where(better, j[:, None], pred_row[k])

        to_sink = np.where(in_cols < n, dist_col + pi_col - pi_sink[:, None], _INF)
        last_col = np.argmin(to_sink, axis=1)
        d_sink = to_sink[lanes, last_col]

        pi_row += np.minimum(dist_row, d_sink[:, None])
        pi_col += np.minimum(dist_col, d_sink[:, None])
        pi_sink += d_sink

        in_cols[lanes, last_col] += 1
        col = last_col.copy()
        walking = np.ones(b, dtype=bool)
        while walking.any():
            k = lanes[walking]
            row = pred_col[k, col[walking]]
            flow[k, row, col[walking]] = True
            back = pred_row[k, row]
            ended = back == -1
            out_rows[k[ended], row[ended]] += 1
            moving = ~ended
            flow[k[moving], row[moving], back[moving]] = False
            col[k[moving]] = back[moving]
            walking[k[ended]] = False

    return flow


def _exact_chunk(batch: BlockBatch, pattern: SparsityPattern):
    network = FlowNetwork.from_blocks(batch.magnitudes, pattern)
    masks = _min_cost_flow(network)
    degenerate = batch.magnitudes.reshape(batch.b, -1).max(axis=1, initial=0.0) == 0
    if degenerate.any():
        masks[degenerate] = _lexicographic_first(int(degenerate.sum()), pattern)
    objective = np.where(masks, batch.magnitudes, 0.0).reshape(batch.b, -1).sum(axis=1)
    return masks, objective


def exact_solve_batch(
    batch: BlockBatch, pattern: SparsityPattern, executor: Optional[BlockExecutor] = None
) -> Tuple[BinaryMaskBatch, np.ndarray]:
    """
    Optimal transposable masks for every block.

    Returns:
        (complete mask batch, (b,) optimal objectives)

    Raises:
        SizeError: block side above 512
        ScaleError: magnitudes beyond the integer cost range
    """
    executor = executor or BlockExecutor(1)
    masks, objective = executor.map_arrays(lambda chunk, offset: _exact_chunk(chunk, pattern), batch)
    logger.debug(f"Exact oracle solved {batch.b} blocks at {pattern}")
    return BinaryMaskBatch(masks, complete=True), objective


def exact_solve(block: np.ndarray, pattern: SparsityPattern) -> Tuple[np.ndarray, float]:
    """
    Optimal transposable mask of one m×m block.

    All-zero blocks return the lexicographically first feasible mask.

    Returns:
        (m×m bool mask, optimal objective)
    """
    masks, objective = exact_solve_batch(BlockBatch.from_blocks(block), pattern)
    return masks.bits[0].copy(), float(objective[0])


def _subsets(m: int, n: int) -> List[Tuple[int, ...]]:
    return list(itertools.combinations(range(m), n))


def brute_force(block: np.ndarray, pattern: SparsityPattern) -> Tuple[np.ndarray, float]:
    """
    Global optimum by exhaustive row-wise search with branch and bound.

    Rows are filled one n-subset at a time (best subsets first). A branch is cut when a
    column would overflow, when some column can no longer reach n, or when the better of
    two upper bounds (each remaining row's top-n sum; each column's top remaining-need
    values) cannot beat the incumbent.

    Raises:
        SizeError: if m > 8
    """
    weights = np.abs(np.asarray(block, dtype=np.float64))
    m, n = weights.shape[0], pattern.n
    if weights.shape != (m, m) or m != pattern.m:
        raise ShapeError(f"Expected a {pattern.m}x{pattern.m} block, got {weights.shape}")
    if m > MAX_BRUTE_FORCE_SIDE:
        raise SizeError(f"Brute force is limited to m <= {MAX_BRUTE_FORCE_SIDE}, got {m}")

    subsets = _subsets(m, n)
    rows = weights.tolist()
    row_choices = []
    for r in range(m):
        scored = sorted(((sum(rows[r][c] for c in s), s) for s in subsets), key=lambda t: -t[0])
        row_choices.append(scored)

    # row bound: best n-subset of every remaining row
    row_suffix = [0.0] * (m + 1)
    for r in range(m - 1, -1, -1):
        row_suffix[r] = row_suffix[r + 1] + row_choices[r][0][0]

    # column bound: top-c values of column j over rows r..m-1
    col_top = []
    for r in range(m + 1):
        per_col = []
        for j in range(m):
            values = sorted((rows[i][j] for i in range(r, m)), reverse=True)
            per_col.append([0.0] + list(itertools.accumulate(values)))
        col_top.append(per_col)

    best_value = -1.0
    best_rows: List[Tuple[int, ...]] = []
    need = [n] * m
    chosen: List[Tuple[int, ...]] = []

    def search(r: int, value: float) -> None:
        nonlocal best_value, best_rows
        if r == m:
            if value > best_value:
                best_value = value
                best_rows = list(chosen)
            return
        col_bound = sum(col_top[r][j][need[j]] for j in range(m))
        if value + min(row_suffix[r], col_bound) <= best_value:
            return
        left_after = m - r - 1
        for gain, subset in row_choices[r]:
            if value + gain + row_suffix[r + 1] <= best_value:
                break
            if any(need[c] == 0 for c in subset):
                continue
            for c in subset:
                need[c] -= 1
            if all(x <= left_after for x in need):
                chosen.append(subset)
                search(r + 1, value + gain)
                chosen.pop()
            for c in subset:
                need[c] += 1

    search(0, 0.0)
    mask = np.zeros((m, m), dtype=bool)
    for r, subset in enumerate(best_rows):
        mask[r, list(subset)] = True
    objective = float(np.where(mask, weights, 0.0).sum())
    return mask, objective


def count_feasible_masks(pattern: SparsityPattern) -> int:
    """Number of m×m 0/1 matrices with every row and column sum equal to n (m ≤ 8)."""
    m, n = pattern.m, pattern.n
    if m > MAX_BRUTE_FORCE_SIDE:
        raise SizeError(f"Enumeration is limited to m <= {MAX_BRUTE_FORCE_SIDE}, got {m}")
    subsets = _subsets(m, n)

    @lru_cache(maxsize=None)
    def count(rows_left: int, need: Tuple[int, ...]) -> int:
        if rows_left == 0:
            return 1 if not any(need) else 0
        total = 0
        for subset in subsets:
            after = list(need)
            ok = True
            for c in subset:
                after[c] -= 1
                if after[c] < 0:
                    ok = False
                    break
            if ok and max(after) <= rows_left - 1:
                # column order is irrelevant to the count
                total += count(rows_left - 1, tuple(sorted(after)))
        return total

    return count(m, tuple([n] * m))


def relative_error(candidate_obj: float, optimal_obj: float) -> float:
    """
    (optimal − candidate) / optimal.

    Raises:
        DegenerateError: if ``optimal_obj`` is 0
    """
    if optimal_obj == 0:
        raise DegenerateError("Relative error is undefined for a zero optimum")
    return (optimal_obj - candidate_obj) / optimal_obj
