"""Per-sub-population second-order statistics of labeled score or embedding data."""

from __future__ import annotations

import logging

import numpy as np

from rawlsian.core.types import LabeledDataset, MomentTable, Moments, SubPopId, all_subpops
from rawlsian.errors import InsufficientData, InvalidInput

logger = logging.getLogger(__name__)

MODES = ("full", "spherical", "score")
REGULARIZATION = 1e-9


def subpop_counts(data: LabeledDataset) -> dict[SubPopId, int]:
    """Exact row count of every sub-population (zeros included)."""
    return {s: int(np.count_nonzero(data.mask(s))) for s in all_subpops(data.p)}


def _canonical_rows(rows: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically so reductions do not depend on input order."""
    if len(rows) < 2:
        return rows
    order = np.lexsort(rows.T[::-1])
    return rows[order]


def _min_count(mode: str, d: int) -> int:
    return d + 1 if mode == "full" else 2


def sample_moments(rows, regularization: float = REGULARIZATION) -> tuple[np.ndarray, np.ndarray]:
    """Mean and ridge-regularized MLE covariance of one block of rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    rows = _canonical_rows(rows)
    n, d = rows.shape
    mean = rows.sum(axis=0) / n
    centered = rows - mean
    cov = centered.T @ centered / n
    cov = (cov + cov.T) / 2.0
    # zero scatter falls back to an absolute ridge
    scale = np.trace(cov) / d or 1.0
    cov += (regularization * scale) * np.eye(d)
    return mean, cov


def estimate_moments(data: LabeledDataset, mode: str = "full", regularization: float = REGULARIZATION) -> MomentTable:
    """Sample mean and maximum-likelihood covariance of each sub-population.

    ``spherical`` replaces each covariance by (trace/d)·I; ``score`` requires d=1.
    """
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {', '.join(MODES)}; got {mode!r}")
    if mode == "score" and data.d != 1:
        raise InvalidInput(f"score mode requires 1 feature column, got {data.d}")
    need = _min_count(mode, data.d)
    counts = subpop_counts(data)
    short = {s: c for s, c in counts.items() if c < need}
    if short:
        detail = ", ".join(f"{s} has {c}" for s, c in short.items())
        raise InsufficientData(f"{mode} mode needs at least {need} rows per sub-population: {detail}")

    entries = {}
    for s in all_subpops(data.p):
        mean, cov = sample_moments(data.features[data.mask(s)], regularization)
        if mode == "spherical":
            cov = (np.trace(cov) / data.d) * np.eye(data.d)
        entries[s] = Moments(count=counts[s], mean=mean, cov=cov)
        logger.debug("%s: n=%d mean=%s", s, counts[s], np.array2string(mean, precision=4))
    return MomentTable(p=data.p, d=data.d, entries=entries)


def spherical_reduction(moments: MomentTable) -> tuple[MomentTable, dict[SubPopId, float]]:
    """Isotropic version of a table, σ_ij = sqrt(trace(Σ_ij)/d), and the σ map."""
    sigma = moments.spherical_sigmas()
    return moments.to_spherical(sigma), sigma


def project_scores(data: LabeledDataset, w) -> LabeledDataset:
    """Score dataset s(x) = w·x, so a threshold can be adapted on a linear black-box score."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (data.d,):
        raise InvalidInput(f"w must have length {data.d}, got {w.shape[0]}")
    return LabeledDataset(p=data.p, features=(data.features @ w).reshape(-1, 1), y=data.y, z=data.z)
