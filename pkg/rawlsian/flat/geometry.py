"""Margin ratios, Gaussian errors and threshold placement for linear heads.

A linear head 1{w·x >= b} uses one threshold for every group, so each
negative sub-population i must fall below b and each positive
sub-population k above it. For a direction w the pair ratio

    κ_ik(w) = w·(μ_1k - μ_0i) / (‖Σ_0i^{1/2} w‖ + ‖Σ_1k^{1/2} w‖)

is the largest margin, in standard deviations, that a shared threshold can
leave on both S_0i and S_1k. Under Gaussian sub-populations the best b along
w gives worst-group error 1 - Φ(min_ik κ_ik). The same-group ratios κ_jj are
the per-group profile κ_j. All ratios are invariant to positive rescaling of
w, so only the direction matters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from rawlsian.core.models import Guarantee, LinearThresholdModel
from rawlsian.core.numerics import normal_cdf, normal_cdf_array
from rawlsian.core.types import MomentTable, SubPopId
from rawlsian.core.validation import SYMMETRY_TOL
from rawlsian.errors import DegeneratePointMass, InvalidInput, OracleInconsistency

logger = logging.getLogger(__name__)

THRESHOLD_AGREEMENT = 1e-8
CERTIFICATE_TOL = 1e-9

Pair = tuple[int, int]


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    final_gap: float
    mode: str
    active_constraints: tuple[Pair, ...] = ()


@dataclass(frozen=True, eq=False)
class FlatResult:
    """Linear head with its certified Gaussian worst-group error.

    ``kappa`` is the per-group profile; ``pair_kappa`` maps (negative group,
    positive group) to κ_ik and ``binding`` names the pair that fixes b_star.
    ``r_star`` is the largest entry of ``per_subpop_error``.
    """
    w_star: np.ndarray
    b_star: float
    r_star: float
    j_star: int
    kappa: dict[int, float]
    pair_kappa: dict[Pair, float]
    binding: tuple[SubPopId, SubPopId]
    per_subpop_error: dict[SubPopId, float]
    solver_diagnostics: SolverDiagnostics = field(default_factory=lambda: SolverDiagnostics(0, 0.0, "finalize"))

    def to_model(self, method: str) -> LinearThresholdModel:
        return LinearThresholdModel(
            w=self.w_star,
            b=self.b_star,
            guarantee=Guarantee(self.r_star, self.j_star),
            method=method,
        )

    @property
    def min_kappa(self) -> float:
        return self.pair_kappa[(self.binding[0].group, self.binding[1].group)]


@dataclass(frozen=True, eq=False)
class GaussianProblem:
    """Moment table unpacked into stacked arrays, with Σ^{1/2} precomputed."""
    mu0: np.ndarray      # (p, d)
    mu1: np.ndarray      # (p, d)
    root0: np.ndarray    # (p, d, d)
    root1: np.ndarray    # (p, d, d)

    @property
    def p(self) -> int:
        return self.mu0.shape[0]

    @property
    def d(self) -> int:
        return self.mu0.shape[1]

    @property
    def dmu(self) -> np.ndarray:
        return self.mu1 - self.mu0

    def pair_index(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based (negative group, positive group) of every pair, row-major."""
        return np.divmod(np.arange(self.p * self.p), self.p)

    @property
    def pair_dmu(self) -> np.ndarray:
        """μ_1k - μ_0i per pair, shape (p², d)."""
        neg, pos = self.pair_index()
        return self.mu1[pos] - self.mu0[neg]

    @classmethod
    def from_moments(cls, moments: MomentTable) -> "GaussianProblem":
        moments.require_valid()
        groups = list(moments.groups())
        return cls(
            mu0=np.stack([moments.mean(0, j) for j in groups]),
            mu1=np.stack([moments.mean(1, j) for j in groups]),
            root0=np.stack([psd_sqrt(moments.cov(0, j)) for j in groups]),
            root1=np.stack([psd_sqrt(moments.cov(1, j)) for j in groups]),
        )

    def spreads(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(‖Σ_0j^{1/2} w‖, ‖Σ_1j^{1/2} w‖) per group."""
        return (
            np.linalg.norm(self.root0 @ w, axis=-1),
            np.linalg.norm(self.root1 @ w, axis=-1),
        )

    def pair_spreads(self, w: np.ndarray) -> np.ndarray:
        """‖Σ_0i^{1/2} w‖ + ‖Σ_1k^{1/2} w‖ per pair."""
        s0, s1 = self.spreads(w)
        neg, pos = self.pair_index()
        return s0[neg] + s1[pos]


def psd_sqrt(sigma) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition; negative eigenvalues are clamped to 0."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {sigma.shape}")
    scale = float(np.max(np.abs(sigma))) if sigma.size else 0.0
    if float(np.max(np.abs(sigma - sigma.T))) > SYMMETRY_TOL * scale:
        raise InvalidInput("matrix is not symmetric")
    vals, vecs = eigh((sigma + sigma.T) / 2.0)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return (root + root.T) / 2.0


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    if num > 0:
        return math.inf
    if num < 0:
        return -math.inf
    return 0.0


def _check_direction(w, d: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (d,):
        raise InvalidInput(f"w must have length {d}, got {w.shape[0]}")
    if not np.any(w):
        raise InvalidInput("w must be a nonzero vector")
    return w


def kappa_profile(w, moments: MomentTable, problem: GaussianProblem | None = None) -> dict[int, float]:
    """κ_j(w) for every group j (1-based)."""
    problem = problem or GaussianProblem.from_moments(moments)
    w = _check_direction(w, problem.d)
    num = problem.dmu @ w
    s0, s1 = problem.spreads(w)
    return {j + 1: _ratio(float(num[j]), float(s0[j] + s1[j])) for j in range(problem.p)}


def pair_kappa_profile(w, moments: MomentTable, problem: GaussianProblem | None = None) -> dict[Pair, float]:
    """κ_ik(w) keyed by 1-based (negative group, positive group)."""
    problem = problem or GaussianProblem.from_moments(moments)
    w = _check_direction(w, problem.d)
    num = problem.pair_dmu @ w
    den = problem.pair_spreads(w)
    neg, pos = problem.pair_index()
    return {
        (int(i) + 1, int(k) + 1): _ratio(float(n), float(s))
        for i, k, n, s in zip(neg, pos, num, den)
    }


def _binding_pair(pairs: dict[Pair, float]) -> Pair:
    # ties: same-group pairs first, then the smallest indices
    return min(pairs, key=lambda ik: (pairs[ik], ik[0] != ik[1], ik))


def _shared_errors(problem: GaussianProblem, w: np.ndarray, b: float) -> dict[SubPopId, float]:
    """Gaussian error of 1{w·x >= b} per sub-population; a point mass on b is predicted 1."""
    s0, s1 = problem.spreads(w)
    errors: dict[SubPopId, float] = {}
    for label, proj, spread in ((0, problem.mu0 @ w, s0), (1, problem.mu1 @ w, s1)):
        sign = 1.0 if label == 0 else -1.0
        for j in range(problem.p):
            if spread[j] > 0:
                err = float(normal_cdf_array(sign * (proj[j] - b) / spread[j]))
            elif label == 0:
                err = 1.0 if proj[j] >= b else 0.0
            else:
                err = 1.0 if proj[j] < b else 0.0
            errors[SubPopId(label, j + 1)] = err
    return dict(sorted(errors.items()))


def flat_finalize(
    w,
    moments: MomentTable,
    diagnostics: SolverDiagnostics | None = None,
    problem: GaussianProblem | None = None,
) -> FlatResult:
    """Place the shared threshold along ``w`` and certify the Gaussian worst-group error."""
    problem = problem or GaussianProblem.from_moments(moments)
    w = _check_direction(w, problem.d)
    kappa = kappa_profile(w, moments, problem)
    pairs = pair_kappa_profile(w, moments, problem)
    i, k = _binding_pair(pairs)
    margin = pairs[(i, k)]

    s0, s1 = problem.spreads(w)
    neg = problem.mu0 @ w
    pos = problem.mu1 @ w
    if margin == math.inf:
        b_star = (float(neg.max()) + float(pos.min())) / 2.0
    elif margin == -math.inf:
        b_star = (float(neg[i - 1]) + float(pos[k - 1])) / 2.0
    else:
        b_star = float(neg[i - 1]) + margin * float(s0[i - 1])
        b_other = float(pos[k - 1]) - margin * float(s1[k - 1])
        scale = max(1.0, abs(float(neg[i - 1])), abs(float(pos[k - 1])))
        if abs(b_star - b_other) > THRESHOLD_AGREEMENT * scale:
            raise OracleInconsistency(f"threshold expressions disagree: {b_star!r} vs {b_other!r}")

    errors = _shared_errors(problem, w, b_star)
    r_star = max(errors.values())
    if math.isfinite(margin) and r_star > normal_cdf(-margin) + CERTIFICATE_TOL:
        logger.warning("threshold %.6g sits on a point mass; worst-group error raised to %.4g", b_star, r_star)
    if i != k:
        logger.info("negatives of group %d and positives of group %d bind the shared threshold", i, k)

    w = w.copy()
    w.setflags(write=False)
    return FlatResult(
        w_star=w,
        b_star=b_star,
        r_star=float(r_star),
        j_star=i,
        kappa=kappa,
        pair_kappa=pairs,
        binding=(SubPopId(0, i), SubPopId(1, k)),
        per_subpop_error=errors,
        solver_diagnostics=diagnostics or SolverDiagnostics(0, 0.0, "finalize"),
    )


def gaussian_linear_error(w, b: float, moments: MomentTable) -> dict[SubPopId, float]:
    """Error of 1{w·x >= b} on each sub-population when it is N(μ_ij, Σ_ij)."""
    problem = GaussianProblem.from_moments(moments)
    w = _check_direction(w, problem.d)
    s0, s1 = problem.spreads(w)
    errors: dict[SubPopId, float] = {}
    for j in range(problem.p):
        for label, mean, spread in ((0, problem.mu0[j], s0[j]), (1, problem.mu1[j], s1[j])):
            proj = float(mean @ w)
            if spread > 0:
                z = (b - proj) / spread
                # 1 - Φ(z) is evaluated as Φ(-z) for tail precision
                err = float(normal_cdf_array(-z)) if label == 0 else float(normal_cdf_array(z))
            elif b == proj:
                raise DegeneratePointMass(
                    f"sub-population {SubPopId(label, j + 1)} has zero variance along w and sits on the threshold"
                )
            elif label == 0:
                err = 1.0 if proj > b else 0.0
            else:
                err = 1.0 if proj < b else 0.0
            errors[SubPopId(label, j + 1)] = err
    return dict(sorted(errors.items()))
