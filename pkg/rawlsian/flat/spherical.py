"""FLAT with spherical covariances: the optimal direction is a min-norm point.

With Σ_ij = σ_ij² I every denominator of a pair ratio κ_ik shares the
factor ‖w‖. The threshold is shared, so every negative sub-population i has to
clear every positive sub-population k, and maximizing min_ik κ_ik is the same as

    minimize ‖w‖  subject to  w·(μ_1k - μ_0i) >= σ_0i + σ_1k  for all i, k,

and κ* = 1/‖w*‖. The threshold is unpenalized and placed afterwards by
``flat_finalize``. The projection is solved exactly as a least-distance program
through nonnegative least squares.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import nnls

from rawlsian.core.types import MomentTable, SubPopId
from rawlsian.errors import InvalidInput, NonSeparable
from rawlsian.flat.geometry import FlatResult, GaussianProblem, SolverDiagnostics, flat_finalize

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
_ZERO = 1e-12


def min_norm_point(G: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """argmin ‖w‖ subject to G w >= h, plus the NNLS multipliers (positive on active rows).

    Raises NonSeparable when the constraints are incompatible.
    """
    m, d = G.shape
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(d + 1)
    f[-1] = 1.0
    u, _ = nnls(E, f)
    r = E @ u - f
    if np.linalg.norm(r) <= _ZERO or abs(r[-1]) <= _ZERO:
        raise NonSeparable("no direction satisfies every pair's margin constraint")
    w = -r[:d] / r[-1]

    # NNLS tolerances can leave a sliver of violation; constraints with h > 0 are
    # homogeneous, so a uniform rescale restores feasibility.
    projected = G @ w
    needs = h > 0
    if needs.any() and (projected[needs] < h[needs]).any():
        if (projected[needs] <= 0).any():
            raise NonSeparable("no direction satisfies every pair's margin constraint")
        w = w * float(np.max(h[needs] / projected[needs]))
    return w, u


def solve_flat_spherical(moments: MomentTable, sigma: dict[SubPopId, float] | None = None) -> FlatResult:
    """FLAT-1: optimal linear head when every sub-population is an isotropic Gaussian.

    ``sigma`` defaults to the trace/d reduction of the table's covariances.
    """
    moments.require_valid()
    sigma = sigma if sigma is not None else moments.spherical_sigmas()
    missing = [s for s in moments.entries if s not in sigma]
    if missing:
        raise InvalidInput(f"sigma missing for {', '.join(map(str, missing))}")
    if any(v < 0 for v in sigma.values()):
        raise InvalidInput("sigma values must be nonnegative")
    spherical = moments.to_spherical(sigma)
    problem = GaussianProblem.from_moments(spherical)

    groups = list(spherical.groups())
    sig0 = np.array([sigma[SubPopId(0, j)] for j in groups])
    sig1 = np.array([sigma[SubPopId(1, j)] for j in groups])
    for j in range(problem.p):
        if np.linalg.norm(problem.dmu[j]) <= _ZERO and sig0[j] + sig1[j] > 0:
            raise NonSeparable(f"group {j + 1}: class means coincide", group=j + 1)

    neg, pos = problem.pair_index()
    G = problem.pair_dmu
    h = sig0[neg] + sig1[pos]
    norms = np.linalg.norm(G, axis=1)
    rows = np.arange(len(G))

    mode = "spherical"
    if not (h > 0).any():
        logger.warning("all sub-populations have zero spread; returning the max-margin direction")
        mode = "degenerate"
        rows = np.nonzero(norms > _ZERO)[0]
        G = G[rows] / norms[rows, None]
        h = np.ones(len(G))

    try:
        w, multipliers = min_norm_point(G, h)
    except NonSeparable as exc:
        raise NonSeparable(f"spherical FLAT infeasible: {exc}") from exc

    violation = float(np.max(h - G @ w, initial=0.0))
    if violation > FEASIBILITY_TOL * max(1.0, float(np.max(np.abs(h)))):
        raise NonSeparable(f"min-norm solution violates a margin constraint by {violation:.3g}")
    active = tuple(
        (int(neg[rows[m]]) + 1, int(pos[rows[m]]) + 1) for m in np.nonzero(multipliers > _ZERO)[0]
    )
    logger.debug("spherical FLAT: ‖w‖=%.6g active pairs %s", float(np.linalg.norm(w)), active)
    diagnostics = SolverDiagnostics(iterations=1, final_gap=max(violation, 0.0), mode=mode, active_constraints=active)
    return flat_finalize(w, spherical, diagnostics, problem)
