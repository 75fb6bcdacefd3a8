"""Subcommand implementations. Each ``cmd_*`` reads its inputs, runs one step
of the pipeline, writes its output file and prints a one-line summary.

Errors propagate as :class:`~rawlsian.errors.RawlsianError`; ``app.main``
turns them into exit codes.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import replace

from rawlsian import formats
from rawlsian.core.models import LinearThresholdModel
from rawlsian.config import RawlsianConfig
from rawlsian.errors import InvalidInput, OracleInconsistency
from rawlsian.evaluation import boundary_grid, evaluate
from rawlsian.experiment import run_experiment
from rawlsian.fat import fat_adapt, fat_grid_oracle
from rawlsian.flat import grid_oracle_2d, solve_flat_general, solve_flat_spherical
from rawlsian.oracle import (
    atom_bound,
    binding_counterexamples,
    brute_force_rawls,
    dual_grid_maximize,
    rawls_threshold_p1,
    relaxed_rawls,
)
from rawlsian.oracle.rawls import MAX_GRID_SUBPOPS
from rawlsian.stats import estimate_moments
from rawlsian.synth import generate, preset

logger = logging.getLogger(__name__)

FLAT_MODES = ("spherical", "general")


def emit(text: str) -> None:
    """Write one summary line to stdout (logs go to stderr)."""
    sys.stdout.write(text + "\n")
    sys.stdout.flush()


def _summary(r_star: float | None, j_star: int | None, **extra) -> str:
    parts = [f"r_star={r_star!r}", f"j_star={j_star}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


def parse_bbox(text: str) -> tuple[float, float, float, float]:
    """``"xmin,ymin,xmax,ymax"`` -> four floats."""
    pieces = [s.strip() for s in text.split(",")]
    if len(pieces) != 4:
        raise InvalidInput(f"bbox needs 4 comma-separated numbers (xmin,ymin,xmax,ymax), got {text!r}")
    try:
        xmin, ymin, xmax, ymax = (float(s) for s in pieces)
    except ValueError:
        raise InvalidInput(f"bbox values must be numbers, got {text!r}") from None
    return xmin, ymin, xmax, ymax


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------

def cmd_synth(name: str, seed: int, out: str) -> int:
    data = generate(preset(name, seed))
    formats.write_dataset(data, out)
    logger.info("wrote %d rows of %s (seed %d) to %s", data.n, name, seed, out)
    emit(f"rows={data.n} p={data.p} d={data.d}")
    return 0


def cmd_stats(path: str, mode: str, out: str, config: RawlsianConfig) -> int:
    data = formats.read_dataset(path)
    table = estimate_moments(data, mode, config.stats.regularization)
    formats.write_stats(table, out)
    emit(f"p={table.p} d={table.d} subpops={len(table.entries)} mode={mode}")
    return 0


# ---------------------------------------------------------------------------
# Adaptation
# ---------------------------------------------------------------------------

def cmd_fat(stats: str, out: str, config: RawlsianConfig) -> int:
    table = formats.read_stats(stats)
    result = fat_adapt(table)
    grid = fat_grid_oracle(table, config.fat.grid_points)
    logger.info("threshold grid check: best grid bound %.6g at b=%.6g (closed form %.6g)",
                grid.worst_bound, grid.b, result.r_star)
    if result.exceeding:
        raise OracleInconsistency(
            f"bounds at b*={result.b_star:.6g} exceed r*={result.r_star:.4g} on "
            + ", ".join(str(s) for s in result.exceeding)
        )
    if grid.worst_bound < result.r_star - 1e-9:
        logger.warning("grid search beat the closed-form bound by %.3g", result.r_star - grid.worst_bound)
    formats.write_model(result.to_model(), out)
    emit(_summary(result.r_star, result.j_star, b_star=repr(result.b_star)))
    return 0


def cmd_flat(stats: str, mode: str, tol: float | None, out: str, config: RawlsianConfig) -> int:
    table = formats.read_stats(stats)
    if mode == "spherical":
        result = solve_flat_spherical(table)
        method = "flat1"
    elif mode == "general":
        cfg = config.flat
        result = solve_flat_general(
            table,
            tol_kappa=tol if tol is not None else cfg.tol_kappa,
            max_bisection=cfg.max_bisection,
            feasibility_iters=cfg.feasibility_iters,
            step_scale=cfg.step_scale,
            kappa_cap=cfg.kappa_cap,
        )
        method = "flat2"
    else:
        raise InvalidInput(f"flat mode must be one of {', '.join(FLAT_MODES)}; got {mode!r}")
    if table.d == 2:
        sweep = grid_oracle_2d(table, config.flat.oracle_directions)
        logger.info("direction sweep check: best ratio %.8g (solver %.8g, grid resolution %.2g)",
                    sweep.kappa, result.min_kappa, sweep.resolution_bound)
        if sweep.kappa > result.min_kappa + max(1e-3, sweep.resolution_bound):
            logger.warning("direction sweep beat the solver's margin ratio by %.3g", sweep.kappa - result.min_kappa)
    formats.write_model(result.to_model(method), out)
    emit(_summary(result.r_star, result.j_star, kappa=repr(result.min_kappa)))
    return 0


# ---------------------------------------------------------------------------
# Evaluation and reports
# ---------------------------------------------------------------------------

def cmd_eval(path: str, model_path: str, out: str) -> int:
    model = formats.read_model(model_path)
    data = formats.read_dataset(path)
    report = evaluate(data, model)
    formats.write_report(formats.report_to_dict(report), out)
    g = model.guarantee
    emit(_summary(g.r_star if g else None, g.j_star if g else None,
                  max_error=repr(report.max_error), accuracy=repr(report.accuracy)))
    return 0


def cmd_oracle(dist_path: str, out: str, config: RawlsianConfig) -> int:
    dist = formats.read_distribution(dist_path)
    solution = brute_force_rawls(dist, config.oracle.max_domain, config.oracle.max_optima)
    relaxed = relaxed_rawls(dist)
    counterexamples = binding_counterexamples(dist, solution)

    check: dict = {
        "relaxed_value": relaxed.value,
        "relaxed_c_star": {f"{s.label},{s.group}": v for s, v in relaxed.c_star.c.items()},
        "atom_bound": atom_bound(dist),
        "grid_value": None,
        "grid_c_star": None,
    }
    if 2 * dist.p <= MAX_GRID_SUBPOPS:
        grid = dual_grid_maximize(dist, config.oracle.dual_resolution)
        check["grid_value"] = grid.value
        check["grid_c_star"] = {f"{s.label},{s.group}": v for s, v in grid.c_star.c.items()}
    check["within_bounds"] = relaxed.value - 1e-9 <= solution.r_star <= relaxed.value + check["atom_bound"] + 1e-9

    doc: dict = {
        "r_star": solution.r_star,
        "optima": [list(f.assignment) for f in solution.optima],
        "argmax_sets": [[f"{s.label},{s.group}" for s in sorted(a)] for a in solution.argmax_sets],
        "n_optima": solution.n_optima,
        "truncated": solution.truncated,
        "binding_counterexamples": len(counterexamples),
        "dual_value_check": check,
    }
    if dist.p == 1:
        rule = rawls_threshold_p1(dist, relaxed.c_star)
        doc["threshold_rule"] = {"t": rule.t, "assignment": list(rule.f.assignment)}
    formats.write_report(doc, out)
    emit(f"r_star={solution.r_star!r} optima={solution.n_optima} relaxed={relaxed.value!r}")
    return 0


def cmd_boundary(model_path: str, bbox: str, resolution: int, out: str) -> int:
    box = parse_bbox(bbox)
    model = formats.read_model(model_path)
    if not isinstance(model, LinearThresholdModel):
        raise InvalidInput("boundary grid needs a linear model")
    grid = boundary_grid(model, box, resolution)
    formats.write_grid(grid, out)
    emit(f"points={len(grid)} positive={int(grid['label'].sum())}")
    return 0


def cmd_experiment(path: str, methods: list[str] | None, out: str, config: RawlsianConfig) -> int:
    exp = config.experiment
    if methods:
        try:
            exp = replace(exp, methods=list(methods))
        except ValueError as exc:
            raise InvalidInput(str(exc)) from None
    data = formats.read_dataset(path)
    report = run_experiment(data, exp, config.flat, config.stats.regularization)
    formats.write_report(report.to_dict(), out)
    for method, row in report.summary.iterrows():
        emit(f"{method}: max_error={row['max_error_mean']:.4f} accuracy={row['accuracy_mean']:.4f}")
    return 0
