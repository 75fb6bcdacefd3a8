"""FLAT with full covariances: bisection over the margin ratio.

With a shared threshold every negative sub-population i has to clear every
positive sub-population k. F(w) = min_ik κ_ik(w) is quasi-concave: for
fixed κ the set

    {w : w·(μ_1k - μ_0i) >= κ (‖Σ_0i^{1/2} w‖ + ‖Σ_1k^{1/2} w‖) for all i, k}

is a convex cone, and (w, b) with margin κ on every sub-population exists iff
the cone holds a nonzero point. That is decided by maximizing the concave slack

    δ_κ(w) = min_ik [ w·(μ_1k - μ_0i) - κ (‖Σ_0i^{1/2} w‖ + ‖Σ_1k^{1/2} w‖) ]

over the unit ball; κ is feasible iff the maximum is positive. The slack is
maximized by projected supergradient ascent and the best iterate is then
polished with SLSQP.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from rawlsian.core.types import MomentTable
from rawlsian.errors import InvalidInput, NonSeparable, SolverBudgetExceeded
from rawlsian.flat.geometry import FlatResult, GaussianProblem, SolverDiagnostics, flat_finalize
from rawlsian.flat.spherical import solve_flat_spherical

logger = logging.getLogger(__name__)

FEASIBLE_SLACK = 1e-10
KAPPA_CAP = 1e6
_ZERO = 1e-12


@dataclass
class _Feasibility:
    w: np.ndarray
    slack: float
    iterations: int


def _slack(problem: GaussianProblem, kappa: float, w: np.ndarray) -> np.ndarray:
    """Per-pair slack w·(μ_1k - μ_0i) - κ(‖Σ_0i^{1/2}w‖ + ‖Σ_1k^{1/2}w‖)."""
    return problem.pair_dmu @ w - kappa * problem.pair_spreads(w)


def _norm_grad(root: np.ndarray, w: np.ndarray) -> np.ndarray:
    v = root @ w
    n = float(np.linalg.norm(v))
    return root.T @ v / n if n > _ZERO else np.zeros_like(w)


def _slack_jacobian(problem: GaussianProblem, kappa: float, w: np.ndarray) -> np.ndarray:
    grad0 = np.array([_norm_grad(r, w) for r in problem.root0])
    grad1 = np.array([_norm_grad(r, w) for r in problem.root1])
    neg, pos = problem.pair_index()
    return problem.pair_dmu - kappa * (grad0[neg] + grad1[pos])


def _unit(w: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(w))
    return w / n if n > 0 else w


def _supergradient_ascent(problem: GaussianProblem, kappa: float, w0: np.ndarray, iters: int, step_scale: float) -> _Feasibility:
    neg, pos = problem.pair_index()
    dmu = problem.pair_dmu
    w = _unit(w0)
    best_w, best = w, float(_slack(problem, kappa, w).min())
    for k in range(1, iters + 1):
        slack = _slack(problem, kappa, w)
        m = int(np.argmin(slack))
        if slack[m] > best:
            best_w, best = w, float(slack[m])
        g = dmu[m] - kappa * (_norm_grad(problem.root0[neg[m]], w) + _norm_grad(problem.root1[pos[m]], w))
        gn = float(np.linalg.norm(g))
        if gn <= _ZERO:
            break
        w = w + (step_scale / math.sqrt(k)) * g / gn
        n = float(np.linalg.norm(w))
        if n > 1.0:
            w = w / n
    return _Feasibility(best_w, best, iters)


def _polish(problem: GaussianProblem, kappa: float, start: _Feasibility) -> _Feasibility:
    """Maximize t subject to slack_ik(w) >= t and ‖w‖² <= 1, starting from the ascent iterate."""
    d = problem.d
    pairs = problem.p * problem.p
    x0 = np.append(_unit(start.w), start.slack)

    constraints = [
        {
            "type": "ineq",
            "fun": lambda x: _slack(problem, kappa, x[:d]) - x[d],
            "jac": lambda x: np.hstack([_slack_jacobian(problem, kappa, x[:d]), -np.ones((pairs, 1))]),
        },
        {
            "type": "ineq",
            "fun": lambda x: np.array([1.0 - x[:d] @ x[:d]]),
            "jac": lambda x: np.append(-2.0 * x[:d], 0.0)[None, :],
        },
    ]
    objective = np.zeros(d + 1)
    objective[d] = -1.0
    res = minimize(
        lambda x: -x[d],
        x0,
        jac=lambda x: objective,
        constraints=constraints,
        method="SLSQP",
        options={"maxiter": 200, "ftol": 1e-14},
    )
    w = res.x[:d]
    if np.linalg.norm(w) > 1.0:
        w = _unit(w)
    slack = float(_slack(problem, kappa, w).min()) if np.any(w) else -math.inf
    if slack > start.slack:
        return _Feasibility(w, slack, start.iterations + int(res.nit))
    return _Feasibility(start.w, start.slack, start.iterations + int(res.nit))


def _feasible(problem: GaussianProblem, kappa: float, w0: np.ndarray, iters: int, step_scale: float) -> _Feasibility:
    ascent = _supergradient_ascent(problem, kappa, w0, iters, step_scale)
    return _polish(problem, kappa, ascent)


def _warm_start(moments: MomentTable, problem: GaussianProblem) -> np.ndarray:
    try:
        return solve_flat_spherical(moments).w_star
    except NonSeparable:
        return _unit(np.sum(problem.dmu / np.linalg.norm(problem.dmu, axis=1, keepdims=True), axis=0))


def solve_flat_general(
    moments: MomentTable,
    tol_kappa: float = 1e-6,
    max_bisection: int = 200,
    feasibility_iters: int = 400,
    step_scale: float = 0.5,
    kappa_cap: float = KAPPA_CAP,
) -> FlatResult:
    """FLAT-2: maximize min_ik κ_ik(w) under full-covariance Gaussian sub-populations."""
    if tol_kappa <= 0:
        raise InvalidInput(f"tol_kappa must be positive, got {tol_kappa}")
    problem = GaussianProblem.from_moments(moments)
    for j, row in enumerate(problem.dmu):
        if not np.any(row):
            raise NonSeparable(f"group {j + 1}: class means coincide", group=j + 1)

    w_best = _warm_start(moments, problem)
    iterations = 0

    def check(kappa: float) -> bool:
        nonlocal w_best, iterations
        result = _feasible(problem, kappa, w_best, feasibility_iters, step_scale)
        iterations += result.iterations
        if result.slack > FEASIBLE_SLACK:
            w_best = result.w
            return True
        return False

    if not check(tol_kappa):
        raise NonSeparable(f"no direction reaches margin ratio {tol_kappa:.3g} on every pair of sub-populations")

    lo, hi = 0.0, 1.0
    while check(hi):
        lo = hi
        if hi >= kappa_cap:
            logger.warning("margin ratio exceeds %.3g; groups are numerically separable", kappa_cap)
            break
        hi = min(2.0 * hi, kappa_cap)

    steps = 0
    while hi - lo > tol_kappa and lo < kappa_cap:
        if steps >= max_bisection:
            raise SolverBudgetExceeded(
                f"bisection bracket [{lo:.6g}, {hi:.6g}] still wider than {tol_kappa:.3g} "
                f"after {max_bisection} steps"
            )
        mid = 0.5 * (lo + hi)
        if check(mid):
            lo = mid
        else:
            hi = mid
        steps += 1

    logger.debug("general FLAT: κ in [%.8g, %.8g] after %d bisection steps", lo, hi, steps)
    diagnostics = SolverDiagnostics(iterations=iterations, final_gap=max(hi - lo, 0.0), mode="general")
    return flat_finalize(w_best, moments, diagnostics, problem)
