"""Fair Adaptation of Threshold (FAT).

A single threshold on a 1-D score that minimizes the worst-case sub-population
error over all score distributions matching the given means and standard
deviations. The worst case of each tail is the one-sided Chebyshev (Cantelli)
bound, so the optimum balances the two tails of the hardest pair of a
negative sub-population i and a positive sub-population k:

    t_ik = (μ_1k - μ_0i) / (σ_0i + σ_1k)
    t*   = min_ik t_ik, attained at (i*, k*)
    b*   = μ_0i* + σ_0i* t* = μ_1k* - σ_1k* t*
    r*   = 1 / (1 + t*²)

Usually the pair is a single group (i* = k* = j*) and t* is that group's own
ratio.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from rawlsian.core.models import Guarantee, ScoreThresholdModel
from rawlsian.core.types import MomentTable, SubPopId
from rawlsian.errors import InvalidInput, NonSeparable, OracleInconsistency

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-9
BOUND_TOL = 1e-9


class Side(str, Enum):
    ABOVE = "above"
    BELOW = "below"


@dataclass(frozen=True)
class TwoPointDistribution:
    values: tuple[float, float]
    probabilities: tuple[float, float]

    @property
    def mean(self) -> float:
        return sum(v * q for v, q in zip(self.values, self.probabilities))

    @property
    def variance(self) -> float:
        m = self.mean
        return sum(q * (v - m) ** 2 for v, q in zip(self.values, self.probabilities))

    def tail(self, b: float, side: Side) -> float:
        """P(X >= b) or P(X <= b)."""
        if side is Side.ABOVE:
            return sum(q for v, q in zip(self.values, self.probabilities) if v >= b)
        return sum(q for v, q in zip(self.values, self.probabilities) if v <= b)


@dataclass(frozen=True)
class FatResult:
    b_star: float
    r_star: float
    j_star: int
    t_star: float
    per_group_bound: dict[SubPopId, float] = field(default_factory=dict)
    warning: bool = False
    binding: tuple[SubPopId, SubPopId] | None = None

    @property
    def exceeding(self) -> list[SubPopId]:
        """Sub-populations whose bound at b_star is above r_star."""
        return [s for s, v in self.per_group_bound.items() if v > self.r_star + BOUND_TOL]

    def to_model(self) -> ScoreThresholdModel:
        return ScoreThresholdModel(b=self.b_star, guarantee=Guarantee(self.r_star, self.j_star), method="fat")


@dataclass(frozen=True)
class GridOracleResult:
    b: float
    worst_bound: float


def robust_tail(mu: float, sigma: float, b: float, side: Side | str) -> float:
    """Largest P(X >= b) (``above``) or P(X <= b) (``below``) over all laws with mean ``mu`` and std ``sigma``."""
    if sigma < 0:
        raise InvalidInput(f"sigma must be nonnegative, got {sigma}")
    side = Side(side)
    gap = b - mu if side is Side.ABOVE else mu - b
    if gap <= 0:
        return 1.0
    var = sigma * sigma
    return var / (var + gap * gap)


def _robust_tails(mu: np.ndarray, sigma: np.ndarray, b: np.ndarray, side: Side) -> np.ndarray:
    """Vectorized :func:`robust_tail` broadcasting over ``b``."""
    gap = b - mu if side is Side.ABOVE else mu - b
    var = sigma * sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = var / (var + gap * gap)
    return np.where(gap <= 0, 1.0, np.nan_to_num(bound, nan=0.0))


def chebyshev_tight_distribution(mu: float, sigma: float, a: float) -> TwoPointDistribution:
    """Two-point law with mean ``mu``, std ``sigma`` and P(X >= mu + a) = σ²/(σ² + a²) exactly."""
    if sigma <= 0 or a <= 0:
        raise InvalidInput(f"sigma and a must be positive, got sigma={sigma}, a={a}")
    var = sigma * sigma
    denom = var + a * a
    return TwoPointDistribution(
        values=(mu + a, mu - var / a),
        probabilities=(var / denom, a * a / denom),
    )


def _scalar_params(moments: MomentTable) -> tuple[np.ndarray, np.ndarray]:
    """(μ, σ) as (2, p) arrays from a d=1 table."""
    if moments.d != 1:
        raise InvalidInput(f"FAT needs a 1-D score (d=1), got d={moments.d}")
    moments.require_valid()
    mu = np.empty((2, moments.p))
    sigma = np.empty((2, moments.p))
    for s, m in moments.entries.items():
        mu[s.label, s.group - 1] = m.mean[0]
        sigma[s.label, s.group - 1] = m.std
    return mu, sigma


def group_bounds(mu: np.ndarray, sigma: np.ndarray, b: float) -> dict[SubPopId, float]:
    """Worst-case error of threshold ``b`` on each sub-population."""
    bounds = {}
    for j in range(mu.shape[1]):
        bounds[SubPopId(0, j + 1)] = float(robust_tail(mu[0, j], sigma[0, j], b, Side.ABOVE))
        bounds[SubPopId(1, j + 1)] = float(robust_tail(mu[1, j], sigma[1, j], b, Side.BELOW))
    return dict(sorted(bounds.items()))


def _ratio(gap: float, spread: float) -> float:
    if spread > 0:
        return gap / spread
    return math.inf if gap > 0 else -math.inf


def _pair_ratios(mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """(μ_1k - μ_0i) / (σ_0i + σ_1k) for every negative group i (rows) and positive group k (columns)."""
    p = mu.shape[1]
    return np.array([[_ratio(mu[1, k] - mu[0, i], sigma[0, i] + sigma[1, k]) for k in range(p)] for i in range(p)])


def _binding_pair(ratios: np.ndarray) -> tuple[int, int]:
    """argmin of the pair ratios; ties go to same-group pairs, then to the smallest indices."""
    t = ratios.min()
    diagonal = np.flatnonzero(np.diag(ratios) == t)
    if diagonal.size:
        j = int(diagonal[0])
        return j, j
    i, k = np.argwhere(ratios == t)[0]
    return int(i), int(k)


def fat_adapt(moments: MomentTable) -> FatResult:
    """Distribution-robust threshold from per-sub-population (μ, σ).

    One threshold serves every group, so each negative sub-population i must
    sit below it and each positive sub-population k above it. The worst-case
    bound r is achievable iff μ_0i + σ_0i s <= μ_1k - σ_1k s for all (i, k)
    with s = sqrt((1 - r) / r), which gives t* = min over pairs of
    (μ_1k - μ_0i) / (σ_0i + σ_1k). When the hardest group's own pair is the
    minimum this is the per-group closed form.
    """
    mu, sigma = _scalar_params(moments)
    ratios = _pair_ratios(mu, sigma)
    for j in range(moments.p):
        if ratios[j, j] <= 0:
            raise NonSeparable(
                f"group {j + 1}: mean positive score {mu[1, j]:.6g} does not exceed "
                f"mean negative score {mu[0, j]:.6g}",
                group=j + 1,
            )

    i, k = _binding_pair(ratios)
    t = float(ratios[i, k])
    if t == math.inf:
        # every spread is zero
        b_star = (float(mu[0].max()) + float(mu[1].min())) / 2.0
        r_star = 0.0
    elif t == -math.inf:
        b_star = float(mu[0, i] + mu[1, k]) / 2.0
        r_star = 1.0
    else:
        b_star = float(mu[0, i] + sigma[0, i] * t)
        b_other = float(mu[1, k] - sigma[1, k] * t)
        scale = max(1.0, abs(b_star), abs(b_other))
        if abs(b_star - b_other) > AGREEMENT_TOL * scale:
            raise OracleInconsistency(f"threshold expressions disagree: {b_star!r} vs {b_other!r}")
        r_star = 1.0 / (1.0 + t * t) if t > 0 else 1.0
    if i != k:
        logger.info(
            "negatives of group %d and positives of group %d bind the shared threshold (t*=%.4g)",
            i + 1, k + 1, t,
        )

    bounds = group_bounds(mu, sigma, b_star)
    worst = max(bounds.values())
    if worst > r_star + BOUND_TOL:
        # only a zero-spread sub-population sitting exactly on b* gets here
        logger.warning("threshold %.6g sits on a point mass; worst-case bound raised to %.4g", b_star, worst)
        r_star = worst
    warning = r_star >= 0.5
    if warning:
        logger.warning(
            "worst-case error %.4g >= 0.5 on group %d: the score barely separates it",
            r_star, i + 1,
        )
    logger.debug("FAT: binding (0,%d)/(1,%d) t*=%.6g b*=%.6g r*=%.6g", i + 1, k + 1, t, b_star, r_star)
    return FatResult(
        b_star=b_star,
        r_star=r_star,
        j_star=i + 1,
        t_star=t,
        per_group_bound=bounds,
        warning=warning,
        binding=(SubPopId(0, i + 1), SubPopId(1, k + 1)),
    )


def fat_grid_oracle(moments: MomentTable, grid_points: int) -> GridOracleResult:
    """Brute-force the threshold over a uniform grid on [min_j μ_0j, max_j μ_1j]."""
    if grid_points < 2:
        raise InvalidInput(f"grid_points must be at least 2, got {grid_points}")
    mu, sigma = _scalar_params(moments)
    lo, hi = float(mu[0].min()), float(mu[1].max())
    if lo >= hi:
        raise InvalidInput(f"empty threshold bracket [{lo:.6g}, {hi:.6g}]")
    grid = np.linspace(lo, hi, grid_points)
    worst = np.zeros_like(grid)
    for j in range(moments.p):
        worst = np.maximum(worst, _robust_tails(mu[0, j], sigma[0, j], grid, Side.ABOVE))
        worst = np.maximum(worst, _robust_tails(mu[1, j], sigma[1, j], grid, Side.BELOW))
    k = int(np.argmin(worst))
    return GridOracleResult(b=float(grid[k]), worst_bound=float(worst[k]))
