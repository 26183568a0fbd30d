"""
Layer-wise reconstruction pruning.

A layer is described by its pretrained weights Ŵ (d_in × d_out, columns are output
channels) and the Gram matrix H = XᵀX + λI of its calibration inputs. The ADMM loop
alternates a ridge-regularized least-squares update of W with a mask projection of
W + V/ρ, so the final weights satisfy the sparsity constraint exactly.
"""

import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from tqdm import tqdm

from ..config.solver_profiles import AdmmConfig, DykstraConfig, RoundingConfig
from ..core.blocks import group_topn_mask
from ..core.exceptions import (
    DegenerateError,
    DimensionError,
    NumericalError,
    PreconditionError,
    ShapeError,
)
from ..core.executor import BlockExecutor
from ..core.types import DenseMatrix, SparsityPattern
from .rounding import solve_mask

logger = logging.getLogger(__name__)

PROJECTOR_KINDS = ("transposable", "nm", "unstructured")


@dataclass(frozen=True)
class LayerProblem:
    """
    Attributes:
        w_hat: pretrained weights, d_in × d_out
        gram: H = XᵀX + λI, d_in × d_in
        lam: ridge λ
        n_samples: calibration rows behind ``gram`` (provenance only)
    """

    w_hat: DenseMatrix
    gram: np.ndarray
    lam: float = 0.0
    n_samples: int = 0

    def __post_init__(self):
        gram = np.array(self.gram, dtype=np.float64)
        d_in = self.w_hat.rows
        if gram.shape != (d_in, d_in):
            raise ShapeError(f"Gram matrix must be {d_in}x{d_in}, got {gram.shape}")
        if not np.isfinite(gram).all():
            raise NumericalError("Gram matrix has NaN or Inf entries")
        if self.lam < 0:
            raise PreconditionError(f"lambda must be non-negative, got {self.lam}")
        scale = max(1.0, float(np.abs(gram).max(initial=0.0)))
        if np.abs(gram - gram.T).max(initial=0.0) > 1e-8 * scale:
            raise PreconditionError("Gram matrix is not symmetric")
        lowest = float(np.linalg.eigvalsh(gram).min())
        if lowest < self.lam - 1e-8 * scale:
            raise PreconditionError(
                f"Gram matrix smallest eigenvalue {lowest:.3g} is below lambda={self.lam:g}"
            )
        gram.flags.writeable = False
        object.__setattr__(self, "gram", gram)

    @property
    def data_gram(self) -> np.ndarray:
        """XᵀX = H − λI."""
        return self.gram - self.lam * np.eye(self.gram.shape[0])


def layer_from_activations(
    x: np.ndarray, w_hat: DenseMatrix, lam: Optional[float] = None, lam_fraction: float = 0.01
) -> LayerProblem:
    """
    Build a LayerProblem from calibration activations X (samples × d_in).

    ``lam`` defaults to ``lam_fraction`` · mean(diag(XᵀX)).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != w_hat.rows:
        raise ShapeError(f"Activations must be (samples, {w_hat.rows}), got {x.shape}")
    xtx = x.T @ x
    xtx = 0.5 * (xtx + xtx.T)
    if lam is None:
        lam = lam_fraction * float(np.mean(np.diag(xtx)))
    return LayerProblem(w_hat, xtx + lam * np.eye(xtx.shape[0]), lam, x.shape[0])


def activation_norms(x: np.ndarray) -> np.ndarray:
    """‖X_:,i‖₂ for every input feature i."""
    return np.linalg.norm(np.asarray(x, dtype=np.float64), axis=0)


def wanda_transform(w_hat: DenseMatrix, x_col_norms: np.ndarray) -> DenseMatrix:
    """
    Importance matrix W′_ij = W_ij · ‖X_:,i‖₂.

    Raises:
        ShapeError: if the norm vector length differs from d_in
        PreconditionError: if a norm is negative
    """
    norms = np.asarray(x_col_norms, dtype=np.float64).reshape(-1)
    if norms.shape[0] != w_hat.rows:
        raise ShapeError(f"Expected {w_hat.rows} input norms, got {norms.shape[0]}")
    if (norms < 0).any():
        raise PreconditionError("Input feature norms must be non-negative")
    return DenseMatrix(w_hat.values * norms[:, None])


def reconstruction_error(layer: LayerProblem, w: DenseMatrix) -> float:
    """
    ‖X(W − Ŵ)‖²_F / ‖XŴ‖²_F, computed through the Gram matrix.

    Raises:
        DegenerateError: if ‖XŴ‖ is zero
    """
    if w.shape != layer.w_hat.shape:
        raise ShapeError(f"Weights {w.shape} do not match the layer {layer.w_hat.shape}")
    xtx = layer.data_gram
    w_hat = layer.w_hat.values
    denominator = float(np.sum(w_hat * (xtx @ w_hat)))
    if denominator <= 0:
        raise DegenerateError("Reconstruction error is undefined when XŴ is zero")
    delta = w.values - w_hat
    return max(0.0, float(np.sum(delta * (xtx @ delta)))) / denominator


@dataclass
class LayerProjector:
    """Maps a score matrix to the best mask of one constraint family."""

    kind: str
    pattern: SparsityPattern
    dykstra_cfg: DykstraConfig = field(default_factory=DykstraConfig)
    rounding_cfg: RoundingConfig = field(default_factory=RoundingConfig)
    executor: Optional[BlockExecutor] = None

    def __post_init__(self):
        if self.kind not in PROJECTOR_KINDS:
            raise ValueError(f"Unknown projector {self.kind!r}; choose from {', '.join(PROJECTOR_KINDS)}")

    def check_shape(self, shape: Tuple[int, int]) -> None:
        """Raises DimensionError if a structured projector cannot tile ``shape``."""
        m = self.pattern.m
        if self.kind != "unstructured" and (shape[0] % m or shape[1] % m):
            raise DimensionError(f"Layer {shape[0]}x{shape[1]} is not divisible by M={m}")

    def project(self, scores: np.ndarray) -> np.ndarray:
        """Boolean mask maximizing (or, for transposable, approximately maximizing) Σ S·scores."""
        if self.kind == "transposable":
            result = solve_mask(
                DenseMatrix(scores), self.pattern, self.dykstra_cfg, self.rounding_cfg, self.executor
            )
            return result.assembled().values > 0.5
        if self.kind == "nm":
            # groups of M consecutive inputs per output channel
            return group_topn_mask(scores, self.pattern.n, self.pattern.m, axis=0)
        keep = int(round(scores.size * self.pattern.density))
        order = np.argsort(-scores.reshape(-1), kind="stable")[:keep]
        mask = np.zeros(scores.size, dtype=bool)
        mask[order] = True
        return mask.reshape(scores.shape)


@dataclass
class AdmmRecord:
    """One ADMM iteration."""

    iteration: int
    rho: float
    primal_residual: float
    mask_score: float
    previous_mask_score: float
    safeguard_triggered: bool
    distance_new: float
    distance_previous: float
    stationarity: float
    reconstruction_error: float


@dataclass
class AdmmTrace:
    records: List[AdmmRecord] = field(default_factory=list)
    converged: bool = False
    projector: str = "transposable"
    final_mask: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def safeguard_triggers(self) -> int:
        return sum(r.safeguard_triggered for r in self.records)

    @property
    def final_residual(self) -> float:
        return self.records[-1].primal_residual if self.records else math.nan

    def to_dict(self) -> dict:
        return {
            "projector": self.projector,
            "converged": self.converged,
            "iterations": self.iterations,
            "safeguard_triggers": self.safeguard_triggers,
            "final_residual": self.final_residual,
            "records": [asdict(r) for r in self.records],
        }


def resolve_rho0(layer: LayerProblem, cfg: AdmmConfig) -> float:
    """cfg.rho0, or 0.1 · mean(diag(H)) when unset."""
    if cfg.rho0 is not None:
        return cfg.rho0
    rho0 = 0.1 * float(np.mean(np.diag(layer.gram)))
    if not rho0 > 0:
        raise DegenerateError("Cannot derive rho0 from a Gram matrix with zero diagonal")
    return rho0


def w_update(gram: np.ndarray, hw: np.ndarray, v: np.ndarray, d: np.ndarray, rho: float) -> np.ndarray:
    """
    Minimizer of the augmented Lagrangian in W: (H + ρI)⁻¹ (HŴ − V + ρD).

    One Cholesky factorization serves every output column.

    Raises:
        NumericalError: if H + ρI is not positive definite
    """
    system = gram + rho * np.eye(gram.shape[0])
    try:
        factor = cho_factor(system, lower=False, check_finite=False)
    except LinAlgError as e:
        raise NumericalError(f"H + rho*I is not positive definite (rho={rho:g}): {e}") from e
    return cho_solve(factor, hw - v + rho * d, check_finite=False)


def admm_prune(
    layer: LayerProblem,
    pattern: SparsityPattern,
    cfg: Optional[AdmmConfig] = None,
    projector_kind: str = "transposable",
    executor: Optional[BlockExecutor] = None,
    show_progress: bool = False,
) -> Tuple[DenseMatrix, AdmmTrace]:
    """
    ADMM with a growing penalty and a mask safeguard.

    Each iteration: W ← (H + ρI)⁻¹(HŴ − V + ρD); Z = W + V/ρ; new mask = projection of
    Z² (kept only if its score Σ S·Z² is not below the previous mask's); D = Z ⊙ mask;
    V ← V + ρ(W − D); ρ ← growth · ρ. Stops once ‖W − D‖_F / ‖Ŵ‖_F < primal_tol.

    Returns:
        (final D, trace)
    """
    cfg = cfg or AdmmConfig()
    projector = LayerProjector(projector_kind, pattern, cfg.dykstra_cfg, cfg.rounding_cfg, executor)
    projector.check_shape(layer.w_hat.shape)

    gram = layer.gram
    w_hat = layer.w_hat.values
    hw = gram @ w_hat
    w_norm = float(np.linalg.norm(w_hat)) or 1.0
    rho = resolve_rho0(layer, cfg)

    mask = projector.project(w_hat ** 2)
    d = np.where(mask, w_hat, 0.0)
    v = np.zeros_like(w_hat)
    trace = AdmmTrace(projector=projector_kind)

    for it in tqdm(range(cfg.max_iters), desc="ADMM", disable=not show_progress, file=sys.stderr):
        rhs = hw - v + rho * d
        w = w_update(gram, hw, v, d, rho)
        stationarity = float(
            np.linalg.norm(gram @ w + rho * w - rhs) / max(np.linalg.norm(rhs), 1e-300)
        )

        z = w + v / rho
        scores = z ** 2
        candidate = projector.project(scores)
        new_score = float(np.sum(scores[candidate]))
        old_score = float(np.sum(scores[mask]))
        triggered = new_score < old_score
        if triggered:
            logger.warning(f"Safeguard kept the previous mask at iteration {it + 1}")
            candidate = mask
            new_score = old_score

        distance_previous = float(np.sum((d - z) ** 2))
        d = np.where(candidate, z, 0.0)
        distance_new = float(np.sum((d - z) ** 2))
        mask = candidate

        v = v + rho * (w - d)
        residual = float(np.linalg.norm(w - d)) / w_norm
        error = reconstruction_error(layer, DenseMatrix(d))
        trace.records.append(
            AdmmRecord(
                iteration=it + 1,
                rho=rho,
                primal_residual=residual,
                mask_score=new_score,
                previous_mask_score=old_score,
                safeguard_triggered=triggered,
                distance_new=distance_new,
                distance_previous=distance_previous,
                stationarity=stationarity,
                reconstruction_error=error,
            )
        )
        logger.debug(f"ADMM {it + 1}: rho={rho:.4g} residual={residual:.3e} error={error:.5f}")
        rho *= cfg.growth
        if residual < cfg.primal_tol:
            trace.converged = True
            break

    trace.final_mask = mask

    logger.info(
        f"✅ ADMM ({projector_kind} {pattern}) finished after {trace.iterations} iterations, "
        f"residual {trace.final_residual:.2e}, {trace.safeguard_triggers} safeguard triggers"
    )
    return DenseMatrix(d), trace


def one_shot_prune(layer: LayerProblem, projector: LayerProjector) -> DenseMatrix:
    """Mask-only pruning: project Ŵ² once and zero everything outside the mask."""
    projector.check_shape(layer.w_hat.shape)
    w_hat = layer.w_hat.values
    return DenseMatrix(np.where(projector.project(w_hat ** 2), w_hat, 0.0))


class AdmmPruner:
    """
    Layer-wise pruner: ADMM reconstruction or a single mask projection.
    """

    def __init__(
        self,
        cfg: Optional[AdmmConfig] = None,
        projector_kind: str = "transposable",
        executor: Optional[BlockExecutor] = None,
        show_progress: bool = False,
    ):
        if projector_kind not in PROJECTOR_KINDS:
            raise ValueError(f"Unknown projector {projector_kind!r}; choose from {', '.join(PROJECTOR_KINDS)}")
        self.cfg = cfg or AdmmConfig()
        self.projector_kind = projector_kind
        self.executor = executor
        self.show_progress = show_progress

    def projector(self, pattern: SparsityPattern) -> LayerProjector:
        return LayerProjector(
            self.projector_kind, pattern, self.cfg.dykstra_cfg, self.cfg.rounding_cfg, self.executor
        )

    def prune(self, layer: LayerProblem, pattern: SparsityPattern) -> Tuple[DenseMatrix, AdmmTrace]:
        """Run ``admm_prune`` with this pruner's settings."""
        return admm_prune(layer, pattern, self.cfg, self.projector_kind, self.executor, self.show_progress)

    def one_shot(self, layer: LayerProblem, pattern: SparsityPattern) -> DenseMatrix:
        """Magnitude mask of Ŵ in the same constraint family, no weight update."""
        return one_shot_prune(layer, self.projector(pattern))
