"""Angle-sweep reference solver for d=2 (the pair ratios depend only on the direction of w)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rawlsian.core.types import MomentTable
from rawlsian.errors import InvalidInput
from rawlsian.flat.geometry import GaussianProblem

_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class DirectionSweep:
    w: np.ndarray
    kappa: float
    resolution_bound: float


def min_kappa_along(problem: GaussianProblem, directions: np.ndarray) -> np.ndarray:
    """min_ik κ_ik for each row of ``directions`` (shape (m, d))."""
    neg, pos = problem.pair_index()
    num = directions @ problem.pair_dmu.T                                    # (m, p²)
    s0 = np.linalg.norm(np.einsum("pij,mj->mpi", problem.root0, directions), axis=-1)
    s1 = np.linalg.norm(np.einsum("pij,mj->mpi", problem.root1, directions), axis=-1)
    den = s0[:, neg] + s1[:, pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(den > 0, num / den, np.sign(num) * np.inf)
    kappa = np.nan_to_num(kappa, nan=0.0)
    return kappa.min(axis=1)


def grid_oracle_2d(moments: MomentTable, directions: int) -> DirectionSweep:
    """Sweep ``directions`` equally spaced unit vectors and keep the best min_ik κ_ik.

    ``resolution_bound`` is the largest change of the objective between the
    maximizer and its neighbouring grid directions, an estimate of how much the
    true optimum can exceed the reported one.
    """
    if moments.d != 2:
        raise InvalidInput(f"angle sweep needs d = 2, got d = {moments.d}")
    if directions < 3:
        raise InvalidInput(f"directions must be at least 3, got {directions}")
    problem = GaussianProblem.from_moments(moments)
    theta = 2.0 * np.pi * np.arange(directions) / directions
    values = np.empty(directions)
    for start in range(0, directions, _CHUNK):
        t = theta[start:start + _CHUNK]
        values[start:start + _CHUNK] = min_kappa_along(problem, np.column_stack([np.cos(t), np.sin(t)]))

    k = int(np.argmax(values))
    neighbours = values[[(k - 1) % directions, (k + 1) % directions]]
    finite = np.isfinite(neighbours) & np.isfinite(values[k])
    bound = float(np.max(np.abs(values[k] - neighbours[finite]), initial=0.0))
    w = np.array([np.cos(theta[k]), np.sin(theta[k])])
    return DirectionSweep(w=w, kappa=float(values[k]), resolution_bound=bound)
