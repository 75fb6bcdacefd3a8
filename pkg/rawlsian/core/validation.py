"""Moment-table validation. Violations are returned as data, never raised."""

from __future__ import annotations

import numpy as np

from rawlsian.core.types import MomentTable, SubPopId, Violation, all_subpops

SYMMETRY_TOL = 1e-9
PSD_TOL = 1e-9


def covariance_violations(cov: np.ndarray, subpop: SubPopId | None = None) -> list[Violation]:
    """Symmetry and PSD checks for a single covariance matrix."""
    found: list[Violation] = []
    scale = float(np.max(np.abs(cov))) if cov.size else 0.0
    asym = float(np.max(np.abs(cov - cov.T))) if cov.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        found.append(Violation(subpop, "asymmetric covariance", f"max |Σ - Σᵀ| = {asym:.3g}"))
        return found
    d = cov.shape[0]
    trace = float(np.trace(cov))
    lowest = float(np.linalg.eigvalsh((cov + cov.T) / 2.0)[0])
    if lowest < -PSD_TOL * max(trace, 0.0) / d:
        found.append(Violation(subpop, "negative eigenvalue", f"smallest eigenvalue {lowest:.3g}"))
    return found


def validate_moment_table(table: MomentTable) -> list[Violation]:
    """Return every invariant violation in ``table`` (empty list means valid)."""
    violations: list[Violation] = []
    expected = set(all_subpops(table.p))
    for subpop in sorted(expected - set(table.entries)):
        violations.append(Violation(subpop, "missing entry", "no statistics for this sub-population"))
    for subpop in sorted(set(table.entries) - expected):
        violations.append(Violation(subpop, "unexpected entry", f"outside p={table.p}"))

    for subpop, moments in table.entries.items():
        if moments.mean.shape != (table.d,):
            violations.append(
                Violation(subpop, "dimension mismatch", f"mean has shape {moments.mean.shape}, expected ({table.d},)")
            )
        if moments.cov.shape != (table.d, table.d):
            violations.append(
                Violation(
                    subpop, "dimension mismatch",
                    f"cov has shape {moments.cov.shape}, expected ({table.d}, {table.d})",
                )
            )
            continue
        if not (np.isfinite(moments.mean).all() and np.isfinite(moments.cov).all()):
            violations.append(Violation(subpop, "non-finite value", "mean or cov contains NaN/inf"))
            continue
        violations.extend(covariance_violations(moments.cov, subpop))
    return violations
