"""Unit tests for greedy rounding, local search and the completion pass."""

import numpy as np
import pytest

from src.config.solver_profiles import DykstraConfig, RoundingConfig
from src.core.blocks import check_feasible, mask_objective
from src.core.exceptions import PreconditionError
from src.core.executor import BlockExecutor
from src.core.types import BinaryMaskBatch, BlockBatch, DenseMatrix, SparsityPattern
from src.processors.rounding import (
    FULL_PIPELINE,
    ROUNDING_VARIANTS,
    TransposableMaskSolver,
    complete_masks,
    greedy_round,
    local_search,
    simple_round,
    solve_blocks,
    solve_mask,
    swap_score,
)


class TestGoldenBlock:
    """The 4×4 example: greedy 5.73, one swap to the optimum 6.05."""

    def setup_method(self):
        self.pattern = SparsityPattern(2, 4)

    def test_greedy_on_magnitudes(self, example_block):
        mask, state = greedy_round(example_block, self.pattern)
        batch = BlockBatch.from_blocks(example_block)
        assert mask_objective(batch, mask).objective == pytest.approx(5.73, abs=1e-9)
        assert mask.complete is False
        assert state.consistent()
        assert state.row_counts[0].tolist() == [2, 2, 2, 1]
        assert state.col_counts[0].tolist() == [2, 2, 2, 1]

    def test_swap_scores(self, example_block):
        mask, _ = greedy_round(example_block, self.pattern)
        scores = swap_score(example_block, mask.bits[0], 3, 3, self.pattern.n)
        expected = {(0, 0): -0.32, (0, 2): -0.31, (1, 1): 0.32, (1, 2): 0.04, (2, 0): -0.28, (2, 1): -0.03}
        for (i, j), value in expected.items():
            assert scores[i, j] == pytest.approx(value, abs=1e-9)
        others = np.ones((4, 4), dtype=bool)
        for position in expected:
            others[position] = False
        assert (scores[others] < -1.0).all()

    def test_local_search_reaches_optimum(self, example_block):
        batch = BlockBatch.from_blocks(example_block)
        mask, _ = greedy_round(example_block, self.pattern)
        improved = local_search(batch, mask, self.pattern, RoundingConfig(local_search_steps=10))
        assert improved.complete
        assert mask_objective(batch, improved).objective == pytest.approx(6.05, abs=1e-9)
        bits = improved.bits[0]
        assert not bits[1, 1]
        assert bits[1, 3] and bits[3, 1]

    def test_completion_picks_the_same_swap(self, example_block):
        mask, _ = greedy_round(example_block, self.pattern)
        bits, moves = complete_masks(example_block[None], mask.bits, self.pattern.n)
        assert moves.tolist() == [1]
        assert mask_objective(BlockBatch.from_blocks(example_block), BinaryMaskBatch(bits)).objective == pytest.approx(
            6.05, abs=1e-9
        )

    def test_full_pipeline(self, example_block):
        result = solve_mask(DenseMatrix(example_block), self.pattern)
        assert result.objective == pytest.approx(6.05, abs=1e-9)
        assert result.variant == FULL_PIPELINE
        assert check_feasible(result.mask, self.pattern)

    def test_swap_score_requires_deficits(self, example_block):
        mask, _ = greedy_round(example_block, self.pattern)
        with pytest.raises(PreconditionError):
            swap_score(example_block, mask.bits[0], 0, 3, self.pattern.n)


class TestGreedyRound:
    """Tie breaking and counters."""

    def test_ties_follow_flat_index(self):
        mask, state = greedy_round(np.ones((4, 4)), SparsityPattern(2, 4))
        assert mask.complete
        assert mask.bits[0].astype(int).tolist() == [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]
        assert state.consistent()

    def test_full_pattern_keeps_everything(self, rng):
        mask, _ = greedy_round(rng.random((3, 4, 4)), SparsityPattern(4, 4))
        assert mask.bits.all()

    def test_counters_never_exceed_n(self, rng):
        pattern = SparsityPattern(3, 8)
        mask, state = greedy_round(rng.random((50, 8, 8)), pattern)
        assert state.row_counts.max() <= 3 and state.col_counts.max() <= 3
        assert check_feasible(mask, pattern, at_most=True)


class TestVariants:
    """solve_blocks over every rounding variant."""

    def setup_method(self):
        generator = np.random.default_rng(5)
        self.pattern = SparsityPattern(4, 8)
        self.batch = BlockBatch.from_blocks(np.abs(generator.standard_normal((40, 8, 8))))
        self.dcfg = DykstraConfig(max_iters=100)

    @pytest.mark.parametrize("variant", list(ROUNDING_VARIANTS))
    def test_variant_feasibility(self, variant):
        result = solve_blocks(self.batch, self.pattern, self.dcfg, variant=variant)
        at_most = variant.endswith("simple")
        assert check_feasible(result.mask, self.pattern, at_most=at_most)
        if not at_most:
            assert result.mask.complete
        assert result.sweeps.shape == (40,)

    def test_local_search_only_applies_gains(self):
        greedy, _ = greedy_round(self.batch.magnitudes, self.pattern)
        before = mask_objective(self.batch, greedy).per_block
        after = mask_objective(self.batch, local_search(self.batch, greedy, self.pattern)).per_block
        assert (after >= before - 1e-12).all()

    def test_zero_steps_changes_nothing(self):
        greedy, _ = greedy_round(self.batch.magnitudes, self.pattern)
        unchanged = local_search(self.batch, greedy, self.pattern, RoundingConfig(local_search_steps=0))
        np.testing.assert_array_equal(unchanged.bits, greedy.bits)

    def test_simple_round_is_underfull_at_most(self):
        mask = simple_round(self.batch.magnitudes, self.pattern)
        assert check_feasible(mask, self.pattern, at_most=True)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            solve_blocks(self.batch, self.pattern, variant="nope")

    @pytest.mark.parametrize("workers", [2, 4])
    def test_threads_do_not_change_masks(self, workers):
        single = solve_blocks(self.batch, self.pattern, self.dcfg)
        parallel = solve_blocks(self.batch, self.pattern, self.dcfg, executor=BlockExecutor(workers))
        np.testing.assert_array_equal(single.mask.bits, parallel.mask.bits)
        assert single.objective == parallel.objective

    def test_tiled_matrix(self, example_block):
        tiled = DenseMatrix(np.tile(example_block, (2, 2)))
        result = solve_mask(tiled, SparsityPattern(2, 4))
        assert result.objective == pytest.approx(4 * 6.05, abs=1e-9)
        assert result.assembled().shape == (8, 8)


class TestTransposableMaskSolver:
    """Solver object used by the workflow."""

    def setup_method(self):
        self.pattern = SparsityPattern(2, 4)
        self.solver = TransposableMaskSolver(executor=BlockExecutor(2))

    def test_solve_matches_module_function(self, example_block):
        matrix = DenseMatrix(np.tile(example_block, (2, 2)))
        result = self.solver.solve(matrix, self.pattern)
        reference = solve_mask(matrix, self.pattern)
        np.testing.assert_array_equal(result.mask.bits, reference.mask.bits)
        assert result.objective == pytest.approx(4 * 6.05, abs=1e-9)

    def test_solve_blocks_variant(self, example_block):
        result = self.solver.solve_blocks(BlockBatch.from_blocks(example_block), self.pattern, "entropy+simple")
        assert result.variant == "entropy+simple"
        assert check_feasible(result.mask, self.pattern, at_most=True)

    def test_mask_weights(self, example_block):
        weights = DenseMatrix(-np.asarray(example_block))
        pruned, mask, result = self.solver.mask_weights(DenseMatrix(example_block), weights, self.pattern)
        assert mask.sum() == 8
        np.testing.assert_array_equal(pruned.values != 0, mask)
        np.testing.assert_array_equal(pruned.values[mask], weights.values[mask])
        assert result.objective == pytest.approx(6.05, abs=1e-9)

    def test_mask_weights_shape_mismatch(self, example_block):
        with pytest.raises(PreconditionError):
            self.solver.mask_weights(DenseMatrix(example_block), DenseMatrix(np.ones((4, 8))), self.pattern)

    def test_defaults(self):
        solver = TransposableMaskSolver()
        assert solver.dykstra_cfg == DykstraConfig()
        assert solver.rounding_cfg == RoundingConfig()
        assert solver.executor.workers == 1
