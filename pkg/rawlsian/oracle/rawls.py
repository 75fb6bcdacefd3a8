"""Exact Rawls classifier on finite distributions, and its dual certificates.

Error rates are linear in the classifier: r_0j(f) = E[f u_0j], r_1j(f) = 1 - E[f u_1j].
Every routine here works on the (n, 2, p) arrays of :class:`FiniteDistribution`
and :class:`UnveilTable` and reports results keyed by :class:`SubPopId`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from rawlsian.core.types import SubPopId, all_subpops
from rawlsian.errors import DomainTooLarge, InvalidInput, OracleInconsistency, RawlsianError
from rawlsian.oracle.distribution import (
    DualWeights,
    FiniteDistribution,
    TabularClassifier,
    UnveilTable,
    unveil,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12
TIE_TOL = 1e-12
MAX_DOMAIN = 24
MAX_OPTIMA = 64
MAX_GRID_SUBPOPS = 4
_CHUNK = 1 << 16


@dataclass(frozen=True)
class RawlsSolution:
    """All deterministic minimizers of the max sub-population error (capped)."""
    r_star: float
    optima: list[TabularClassifier]
    argmax_sets: list[frozenset[SubPopId]]
    truncated: bool
    n_optima: int


@dataclass(frozen=True)
class DualGridResult:
    c_star: DualWeights
    value: float
    grid_points: int


@dataclass(frozen=True)
class ThresholdRule:
    """Threshold rule on the posterior for p=1: f(x) = 1{η(x) >= t}."""
    t: float
    f: TabularClassifier


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    """Optimum of the randomized relaxation h: X -> [0, 1] and its LP dual weights."""
    value: float
    h: np.ndarray
    c_star: DualWeights
    errors: dict[SubPopId, float] = field(default_factory=dict)


def _check_classifier(dist: FiniteDistribution, f: TabularClassifier) -> np.ndarray:
    if len(f.assignment) != dist.n:
        raise InvalidInput(f"classifier defines {len(f.assignment)} labels for a domain of {dist.n} points")
    return f.as_array()


def _as_dict(arr: np.ndarray) -> dict[SubPopId, float]:
    return {s: float(arr[s.label, s.group - 1]) for s in all_subpops(arr.shape[1])}


def _linear_form(dist: FiniteDistribution) -> tuple[np.ndarray, np.ndarray]:
    """(A, const) with errors(f) = f @ A + const, columns in canonical sub-population order."""
    pm = dist.subpop_mass()
    a0 = dist.mass[:, 0, :] / pm[0]
    a1 = -dist.mass[:, 1, :] / pm[1]
    const = np.concatenate([np.zeros(dist.p), np.ones(dist.p)])
    return np.hstack([a0, a1]), const


def error_rates(dist: FiniteDistribution, f: TabularClassifier, table: UnveilTable | None = None) -> dict[SubPopId, float]:
    """r_ij(f), computed directly and through the unveil functions; the two must agree."""
    fa = _check_classifier(dist, f)
    table = table or unveil(dist)
    pm = dist.subpop_mass()

    direct = np.empty((2, dist.p))
    direct[0] = fa @ dist.mass[:, 0, :] / pm[0]
    direct[1] = (1.0 - fa) @ dist.mass[:, 1, :] / pm[1]

    weighted = table.marginal_x * fa
    via_unveil = np.empty((2, dist.p))
    via_unveil[0] = weighted @ table.u[:, 0, :]
    via_unveil[1] = 1.0 - weighted @ table.u[:, 1, :]

    gap = float(np.max(np.abs(direct - via_unveil)))
    if gap > IDENTITY_TOL:
        raise OracleInconsistency(f"error-rate identity violated by {gap:.3g}")
    return _as_dict(direct)


def max_error(dist: FiniteDistribution, f: TabularClassifier) -> float:
    return max(error_rates(dist, f).values())


def max_error_dual(dist: FiniteDistribution, f: TabularClassifier, c: DualWeights) -> float:
    """E_X[f(X) Σ_ij (-1)^i c_ij u_ij(X)] + Σ_j c_1j for fixed weights ``c``."""
    fa = _check_classifier(dist, f)
    table = unveil(dist)
    cw = c.as_array(dist.p)
    signed = table.u[:, 0, :] @ cw[0] - table.u[:, 1, :] @ cw[1]
    return float(np.sum(table.marginal_x * fa * signed) + cw[1].sum())


def _argmax_set(errors: np.ndarray, subpops: list[SubPopId]) -> frozenset[SubPopId]:
    top = errors.max()
    return frozenset(s for s, e in zip(subpops, errors) if e >= top - TIE_TOL)


def brute_force_rawls(
    dist: FiniteDistribution,
    max_domain: int = MAX_DOMAIN,
    max_optima: int = MAX_OPTIMA,
) -> RawlsSolution:
    """Enumerate all 2^n deterministic classifiers and return every minimizer of the max error.

    Minimizers are listed in ascending bit-mask order (bit k is the label of point k)
    and capped at ``max_optima``.
    """
    n = dist.n
    if n > max_domain:
        raise DomainTooLarge(f"domain has {n} points; exact enumeration is limited to {max_domain}")
    A, const = _linear_form(dist)
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n

    def chunks():
        for start in range(0, total, _CHUNK):
            masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            bits = ((masks[:, None] >> shifts) & 1).astype(float)
            yield masks, bits @ A + const

    r_star = min(float(errs.max(axis=1).min()) for _, errs in chunks())

    subpops = all_subpops(dist.p)
    optima: list[TabularClassifier] = []
    argmax_sets: list[frozenset[SubPopId]] = []
    count = 0
    for masks, errs in chunks():
        hits = np.nonzero(errs.max(axis=1) <= r_star + TIE_TOL)[0]
        count += len(hits)
        for k in hits:
            if len(optima) >= max_optima:
                break
            optima.append(TabularClassifier.from_mask(int(masks[k]), n))
            argmax_sets.append(_argmax_set(errs[k], subpops))

    truncated = count > len(optima)
    if truncated:
        logger.info("%d optimal classifiers found; keeping the first %d", count, len(optima))
    return RawlsSolution(r_star=r_star, optima=optima, argmax_sets=argmax_sets, truncated=truncated, n_optima=count)


def _dual_scores(table: UnveilTable, cw: np.ndarray) -> np.ndarray:
    """Σ_j c_0j u_0j(x) - c_1j u_1j(x) for each point (rows of ``cw`` may be batched)."""
    return cw[..., 0, :] @ table.u[:, 0, :].T - cw[..., 1, :] @ table.u[:, 1, :].T


def dual_value(dist: FiniteDistribution, c: DualWeights, table: UnveilTable | None = None) -> float:
    """g(c) = E_X[min(0, Σ_j c_0j u_0j(X) - c_1j u_1j(X))] + Σ_j c_1j.

    This is the minimum of the weighted error over relaxed classifiers, attained by
    h_c(x) = 1{score(x) <= 0}.
    """
    table = table or unveil(dist)
    cw = c.as_array(dist.p)
    scores = _dual_scores(table, cw)
    return float(table.marginal_x @ np.minimum(0.0, scores) + cw[1].sum())


def dual_classifier(dist: FiniteDistribution, c: DualWeights) -> TabularClassifier:
    """h_c(x) = 1{Σ_j c_0j u_0j(x) - c_1j u_1j(x) <= 0}."""
    scores = _dual_scores(unveil(dist), c.as_array(dist.p))
    return TabularClassifier(tuple(int(s <= 0.0) for s in scores))


@lru_cache(maxsize=32)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``, lexicographically ascending."""
    if parts == 1:
        grid = np.array([[total]], dtype=np.int64)
    else:
        blocks = []
        for first in range(total + 1):
            rest = _compositions(total - first, parts - 1)
            blocks.append(np.hstack([np.full((len(rest), 1), first, dtype=np.int64), rest]))
        grid = np.vstack(blocks)
    grid.setflags(write=False)
    return grid


def dual_grid_maximize(dist: FiniteDistribution, resolution: int) -> DualGridResult:
    """Maximize :func:`dual_value` over the simplex grid with step 1/resolution.

    Among grid maximizers (within 1e-12) the lexicographically smallest weight
    vector, in canonical sub-population order, is returned.
    """
    k = 2 * dist.p
    if k > MAX_GRID_SUBPOPS:
        raise DomainTooLarge(f"dual grid supports at most {MAX_GRID_SUBPOPS} sub-populations, got {k}")
    if resolution < 1:
        raise InvalidInput(f"resolution must be positive, got {resolution}")
    table = unveil(dist)
    grid = _compositions(resolution, k)

    value = np.empty(len(grid))
    for start in range(0, len(grid), _CHUNK):
        cw = (grid[start:start + _CHUNK] / resolution).reshape(-1, 2, dist.p)
        scores = _dual_scores(table, cw)
        value[start:start + _CHUNK] = np.minimum(0.0, scores) @ table.marginal_x + cw[:, 1, :].sum(axis=1)

    best = int(np.argmax(value >= value.max() - TIE_TOL))
    c_star = DualWeights.from_array((grid[best] / resolution).reshape(2, dist.p))
    return DualGridResult(c_star=c_star, value=float(value[best]), grid_points=len(value))


def rawls_threshold_p1(dist: FiniteDistribution, c: DualWeights) -> ThresholdRule:
    """For one group, the dual classifier is a threshold on η(x) = P(Y=1 | X=x).

    t = (c_0/p_0) / (c_1/p_1 + c_0/p_0).
    """
    if dist.p != 1:
        raise InvalidInput(f"threshold form requires p = 1, got p = {dist.p}")
    cw = c.as_array(1)
    c0, c1 = float(cw[0, 0]), float(cw[1, 0])
    if c0 == 0.0 and c1 == 0.0:
        raise InvalidInput("threshold undefined when both weights are zero")
    pm = dist.subpop_mass()
    p0, p1 = float(pm[0, 0]), float(pm[1, 0])
    t = (c0 / p0) / (c1 / p1 + c0 / p0)

    table = unveil(dist)
    eta = table.eta[:, 1, 0]
    labels = (eta >= t).astype(int)

    support = table.marginal_x > 0
    margin = c1 * table.u[:, 1, 0] - c0 * table.u[:, 0, 0]
    decisive = support & (np.abs(margin) > TIE_TOL * max(1.0, float(np.abs(margin).max())))
    expected = (margin >= 0).astype(int)
    if (labels[decisive] != expected[decisive]).any():
        raise OracleInconsistency("η-threshold and weighted unveil-score classifiers disagree")
    return ThresholdRule(t=t, f=TabularClassifier(tuple(int(v) for v in labels)))


def relaxed_rawls(dist: FiniteDistribution) -> RelaxedSolution:
    """Solve min_{h in [0,1]^n} max_ij r_ij(h) as a linear program.

    The dual multipliers of the 2p error constraints are the optimal weights c*;
    by LP duality the optimum equals max_c dual_value(c).
    """
    A, const = _linear_form(dist)
    n, k = A.shape
    # variables (h_1..h_n, t): minimize t s.t. A^T h + const - t <= 0
    objective = np.zeros(n + 1)
    objective[-1] = 1.0
    a_ub = np.hstack([A.T, -np.ones((k, 1))])
    b_ub = -const
    bounds = [(0.0, 1.0)] * n + [(None, None)]
    res = linprog(objective, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise RawlsianError(f"relaxed Rawls LP failed: {res.message}")
    weights = np.clip(-np.asarray(res.ineqlin.marginals, dtype=float), 0.0, None)
    weights /= weights.sum()
    h = np.asarray(res.x[:n])
    errors = h @ A + const
    return RelaxedSolution(
        value=float(res.x[-1]),
        h=h,
        c_star=DualWeights.from_array(weights.reshape(2, dist.p)),
        errors={s: float(e) for s, e in zip(all_subpops(dist.p), errors)},
    )


def atom_bound(dist: FiniteDistribution) -> float:
    """Largest single-point conditional mass max_{x,ij} mass(x,i,j)/p_ij."""
    return float((dist.mass / dist.subpop_mass()[None, :, :]).max())


def binding_counterexamples(dist: FiniteDistribution, solution: RawlsSolution) -> list[tuple[TabularClassifier, frozenset[SubPopId]]]:
    """Non-trivial optima whose worst-off set is not {≥2 sub-populations spanning both labels}.

    Only meaningful when no constant classifier is optimal; returns [] otherwise.
    Each counterexample is logged.
    """
    if solution.r_star >= 1.0 - TIE_TOL:
        return []
    found = []
    for f, worst in zip(solution.optima, solution.argmax_sets):
        if f.is_trivial:
            continue
        labels = {s.label for s in worst}
        if len(worst) < 2 or labels != {0, 1}:
            logger.warning("optimum %s attains r*=%.6g only on %s", f.assignment, solution.r_star, sorted(worst))
            found.append((f, worst))
    return found
