#!/usr/bin/env python3
"""
Command Line Interface for the Transposable N:M Mask Toolkit.

Every subcommand prints exactly one JSON object on stdout; logs go to stderr.
Exit codes: 0 success, 1 runtime or I/O error, 2 usage error, 3 verification failure,
130 interrupted.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src import __version__
from src.config import AdmmConfig, AppSettings, get_preset, list_presets
from src.config.solver_profiles import override
from src.core.benchmark import BENCH_SOLVERS, DISTRIBUTIONS, STANDARD_PATTERNS, SweepSpec, run_bench, run_sweep
from src.core.executor import BlockExecutor
from src.core.types import DenseMatrix, SparsityPattern
from src.core.workflow import PRUNE_METHODS, SOLVERS, MaskSolverWorkflow
from src.processors.layerwise import LayerProblem, activation_norms, layer_from_activations
from src.processors.rounding import ROUNDING_VARIANTS
from src.utils.logging_config import setup_logging
from src.utils.mask_validator import MaskValidator
from src.utils.matrix_io import load_input, write_csv, write_mask, write_matrix
from src.utils.reports import write_bench_report, write_sweep_csv, write_trace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_INTERRUPTED = 130


class UsageError(Exception):
    """Flag combination that argparse cannot reject on its own."""


def pattern_type(text: str) -> SparsityPattern:
    try:
        return SparsityPattern.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def seed_type(text: str) -> int:
    value = non_negative_int(text)
    if value >= 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a non-negative finite number, got {text}")
    return value


def solver_list(text: str) -> List[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    known = BENCH_SOLVERS + tuple(ROUNDING_VARIANTS)
    unknown = [name for name in names if name not in known]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown solvers {unknown}; choose from {', '.join(known)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the solve, bench, prune and verify subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=seed_type, default=0, help="Random seed (default: 0)")
    common.add_argument(
        "--threads",
        type=non_negative_int,
        default=None,
        help="Worker threads, 0 = all CPUs (default: $TNM_THREADS or 1)",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument(
        "--preset",
        choices=list_presets(),
        default="default",
        help="Solver preset: default, fast (fewer sweeps), precise (sharper τ, more sweeps)",
    )
    solver.add_argument("--tau-scale", type=positive_float, default=None, help="τ scale (default: 200)")
    solver.add_argument(
        "--tau-absolute",
        action="store_true",
        help="Use τ = 0.005 · max|W| per block instead of the scale-invariant τ",
    )
    solver.add_argument("--ls-steps", type=non_negative_int, default=None, help="Local-search steps (default: 10)")

    parser = argparse.ArgumentParser(
        prog="tnmask",
        description="Transposable N:M sparsity masks: solve, benchmark, prune and verify.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s solve --input w.csv --pattern 2:4 --output w.mask.tnm
  %(prog)s solve --input w.tnm --pattern 8:16 --solver exact
  %(prog)s bench --n 8 --m 16 --blocks 100 --solvers tsenor,greedy2 --report bench.json
  %(prog)s bench --sweep --blocks 100 --report sweep.json --csv sweep.csv
  %(prog)s prune --weights w.tnm --activations x.tnm --pattern 2:4 --output pruned.tnm
  %(prog)s verify --mask w.mask.tnm --pattern 2:4 --transposable
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[common, solver], help="Compute a mask for one matrix")
    solve.add_argument("--input", required=True, help="Weight matrix (.tnm or .csv)")
    solve.add_argument("--pattern", type=pattern_type, required=True, help="N:M pattern, e.g. 2:4")
    solve.add_argument("--solver", choices=SOLVERS, default="tsenor", help="Mask solver (default: tsenor)")
    solve.add_argument("--iters", type=positive_int, default=None, help="Dykstra sweeps (default: 300)")
    solve.add_argument("--k", type=positive_int, default=1000, help="Random baseline samples (default: 1000)")
    solve.add_argument("--output", default=None, help="Mask file (default: <output dir>/<input>.mask.tnm)")
    solve.add_argument("--timings", action="store_true", help="Report wall time in the summary")

    bench = commands.add_parser("bench", parents=[common, solver], help="Relative error against the exact oracle")
    bench.add_argument("--pattern", type=pattern_type, default=None, help="N:M pattern (or --n and --m)")
    bench.add_argument("--n", type=positive_int, default=None, help="Kept entries per group")
    bench.add_argument("--m", type=positive_int, default=None, help="Group size / block side")
    bench.add_argument("--blocks", type=positive_int, default=100, help="Sampled blocks per pattern (default: 100)")
    bench.add_argument("--dist", choices=DISTRIBUTIONS, default="gaussian", help="Magnitude distribution")
    bench.add_argument(
        "--solvers",
        type=solver_list,
        default=["tsenor", "greedy2", "binm"],
        help="Comma-separated solvers or rounding variants (default: tsenor,greedy2,binm)",
    )
    bench.add_argument("--iters", type=positive_int, default=None, help="Dykstra sweeps (default: 300)")
    bench.add_argument("--k", type=positive_int, default=1000, help="Random baseline samples (default: 1000)")
    bench.add_argument(
        "--sweep",
        action="store_true",
        help="Run every rounding variant over the pattern set (or --pattern only)",
    )
    bench.add_argument("--report", default=None, help="Write the JSON report here")
    bench.add_argument("--csv", default=None, help="Write the summary table here")
    bench.add_argument("--timings", action="store_true", help="Include wall times in the JSON report")

    prune = commands.add_parser("prune", parents=[common, solver], help="Prune one linear layer")
    prune.add_argument("--weights", required=True, help="Pretrained weights, d_in x d_out")
    calibration = prune.add_mutually_exclusive_group()
    calibration.add_argument("--gram", default=None, help="XᵀX of the calibration inputs, d_in x d_in")
    calibration.add_argument("--activations", default=None, help="Calibration inputs X, samples x d_in")
    prune.add_argument(
        "--lambda",
        dest="lam",
        type=non_negative_float,
        default=None,
        help="Ridge λ (default: 0.01 · mean diag(XᵀX) with --activations, 0 with --gram)",
    )
    prune.add_argument("--pattern", type=pattern_type, required=True, help="N:M pattern, e.g. 2:4")
    prune.add_argument("--method", choices=PRUNE_METHODS, default="admm", help="Pruning method (default: admm)")
    prune.add_argument("--rho0", type=positive_float, default=None, help="Initial ADMM penalty")
    prune.add_argument("--growth", type=positive_float, default=None, help="Penalty growth per iteration")
    prune.add_argument("--iters", type=positive_int, default=None, help="ADMM iterations (default: 300)")
    prune.add_argument("--tol", type=positive_float, default=None, help="Relative primal residual target")
    prune.add_argument("--output", default=None, help="Pruned weights (default: <output dir>/<weights>.pruned.tnm)")
    prune.add_argument("--trace", default=None, help="Trace JSON (default: <output>.trace.json)")

    verify = commands.add_parser("verify", help="Check a mask file against a pattern")
    verify.add_argument("--mask", required=True, help="TNM1 mask file")
    verify.add_argument("--pattern", type=pattern_type, required=True, help="N:M pattern, e.g. 2:4")
    verify.add_argument("--transposable", action="store_true", help="Also check column groups")
    verify.add_argument("--at-most", action="store_true", help="Accept group sums below N")
    verify.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")

    return parser


def emit(payload: dict) -> None:
    """Print one JSON summary line on stdout."""
    print(json.dumps(payload, allow_nan=False))
    sys.stdout.flush()


def _solver_configs(args, settings: AppSettings, iters: Optional[int] = None):
    preset = get_preset(args.preset)
    dcfg = override(
        preset.dykstra,
        tau_scale=args.tau_scale if args.tau_scale is not None else settings.tau_scale,
        max_iters=iters if iters is not None else settings.max_iters,
        tau_absolute=True if args.tau_absolute else None,
    )
    rcfg = override(
        preset.rounding,
        local_search_steps=args.ls_steps if args.ls_steps is not None else settings.local_search_steps,
    )
    return dcfg, rcfg


def _default_output(settings: AppSettings, source: str, suffix: str) -> Path:
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    return settings.output_dir / f"{Path(source).stem}{suffix}"


def cmd_solve(args, settings: AppSettings) -> int:
    dcfg, rcfg = _solver_configs(args, settings, args.iters)
    workflow = MaskSolverWorkflow(dcfg, rcfg, threads=args.threads, k=args.k, seed=args.seed)
    matrix = load_input(args.input)
    summary = workflow.solve(matrix, args.pattern, args.solver)

    output = Path(args.output) if args.output else _default_output(settings, args.input, ".mask.tnm")
    write_mask(output, summary.mask)
    logger.info(f"📄 Mask saved to: {output}")

    payload = summary.to_dict(include_timings=args.timings)
    payload["output"] = str(output)
    emit(payload)
    return EXIT_OK


def _bench_pattern(args) -> Optional[SparsityPattern]:
    if args.pattern is not None:
        if args.n is not None or args.m is not None:
            raise UsageError("use either --pattern or --n/--m, not both")
        return args.pattern
    if args.n is None and args.m is None:
        return None
    if args.n is None or args.m is None:
        raise UsageError("--n and --m must be given together")
    try:
        return SparsityPattern(args.n, args.m)
    except ValueError as e:
        raise UsageError(str(e))


def cmd_bench(args, settings: AppSettings) -> int:
    dcfg, rcfg = _solver_configs(args, settings, args.iters)
    executor = BlockExecutor(args.threads)
    pattern = _bench_pattern(args)

    if args.sweep:
        spec = SweepSpec(
            patterns=(pattern,) if pattern else STANDARD_PATTERNS,
            block_count=args.blocks,
            distribution=args.dist,
        )
        report = run_sweep(spec, args.seed, dcfg, rcfg, executor, show_progress=args.verbose)
    else:
        if pattern is None:
            raise UsageError("bench needs --pattern or --n and --m (or --sweep)")
        report = run_bench(
            pattern, args.solvers, args.blocks, args.dist, args.seed, dcfg, rcfg, executor, args.k
        )

    if args.report:
        write_bench_report(args.report, report, include_timings=args.timings)
    if args.csv:
        write_sweep_csv(args.csv, report)

    payload = {"command": "bench", **report.to_dict(include_timings=args.timings)}
    payload["report"] = args.report
    emit(payload)
    return EXIT_OK


def _load_layer(args, weights: DenseMatrix) -> Optional[LayerProblem]:
    if args.activations:
        x = load_input(args.activations).values
        return layer_from_activations(x, weights, lam=args.lam)
    if args.gram:
        lam = args.lam or 0.0
        xtx = load_input(args.gram).values
        return LayerProblem(weights, xtx + lam * np.eye(xtx.shape[0]), lam)
    return None


def cmd_prune(args, settings: AppSettings) -> int:
    dcfg, rcfg = _solver_configs(args, settings)
    workflow = MaskSolverWorkflow(dcfg, rcfg, threads=args.threads, seed=args.seed)
    weights = load_input(args.weights)
    layer = _load_layer(args, weights)
    if args.method == "admm" and layer is None:
        raise UsageError("--method admm needs --gram or --activations")
    if args.method == "wanda" and layer is None:
        raise UsageError("--method wanda needs --activations or --gram")

    input_norms = None
    if args.method == "wanda" and args.activations:
        input_norms = activation_norms(load_input(args.activations).values)
    admm_cfg = override(
        AdmmConfig(dykstra_cfg=dcfg, rounding_cfg=rcfg),
        rho0=args.rho0,
        growth=args.growth,
        max_iters=args.iters,
        primal_tol=args.tol,
    )
    outcome = workflow.prune(
        weights,
        args.pattern,
        args.method,
        layer=layer,
        input_norms=input_norms,
        admm_cfg=admm_cfg,
        show_progress=args.verbose,
    )

    output = Path(args.output) if args.output else _default_output(settings, args.weights, ".pruned.tnm")
    mask_path = output.with_suffix(".mask.tnm")
    trace_path = Path(args.trace) if args.trace else output.with_suffix(".trace.json")
    if output.suffix.lower() == ".csv":
        write_csv(output, outcome.weights)
    else:
        write_matrix(output, outcome.weights)
    write_mask(mask_path, outcome.mask)
    write_trace(trace_path, outcome.trace)
    logger.info(f"📄 Pruned weights saved to: {output}")

    admm = outcome.trace.get("admm", {})
    emit(
        {
            "command": "prune",
            "method": args.method,
            "pattern": str(args.pattern),
            "rows": weights.rows,
            "cols": weights.cols,
            "kept": outcome.trace["kept"],
            "reconstruction_error": outcome.trace.get("reconstruction_error"),
            "iterations": admm.get("iterations"),
            "final_residual": admm.get("final_residual"),
            "output": str(output),
            "mask": str(mask_path),
            "trace": str(trace_path),
        }
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    validator = MaskValidator(args.pattern, transposable=args.transposable, at_most=args.at_most)
    feasible, violations = validator.validate_file(args.mask)
    emit(
        {
            "command": "verify",
            "pattern": str(args.pattern),
            "transposable": args.transposable,
            "at_most": args.at_most,
            "feasible": feasible,
            "violations": violations,
        }
    )
    if feasible:
        logger.info("✅ Mask satisfies the pattern")
        return EXIT_OK
    logger.warning(f"Mask violates {args.pattern} in {len(violations)} groups")
    return EXIT_INFEASIBLE


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        # Load settings from environment
        settings = AppSettings.from_env()
        settings.validate()
    except ValueError as e:
        setup_logging(verbose=args.verbose)
        logger.error(f"Error: {e}")
        return EXIT_USAGE

    setup_logging(verbose=args.verbose or settings.verbose_logging)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = settings.threads

    try:
        if args.command == "solve":
            return cmd_solve(args, settings)
        if args.command == "bench":
            return cmd_bench(args, settings)
        if args.command == "prune":
            return cmd_prune(args, settings)
        return cmd_verify(args)

    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.warning("Operation cancelled by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.error(f"Error: {e}", exc_info=args.verbose)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
