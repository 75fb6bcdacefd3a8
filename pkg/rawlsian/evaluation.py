"""Empirical per-sub-population error rates and decision-boundary grids."""

from __future__ import annotations

import logging
from fractions import Fraction

import numpy as np
import pandas as pd

from rawlsian.core.models import LinearThresholdModel, ThresholdClassifier
from rawlsian.core.types import EvaluationReport, LabeledDataset, SubPopId, all_subpops
from rawlsian.errors import InsufficientData, InvalidInput

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


def _range(values: list[float]) -> tuple[float, float]:
    return (min(values), max(values)) if values else (float("nan"), float("nan"))


def evaluate(data: LabeledDataset, model: ThresholdClassifier) -> EvaluationReport:
    """Error rate of ``model`` on every sub-population of ``data``.

    Empty sub-populations are reported in ``empty_subpops`` and left out of the
    maximum. Counts stay integral until the final division.
    """
    if data.d != model.dim:
        raise InvalidInput(f"model expects {model.dim} features, data has {data.d}")
    wrong = model.predict_many(data.features) != data.y

    counts: dict[SubPopId, int] = {}
    misclassified: dict[SubPopId, int] = {}
    errors: dict[SubPopId, float] = {}
    empty: list[SubPopId] = []
    for s in all_subpops(data.p):
        mask = data.mask(s)
        n = int(np.count_nonzero(mask))
        k = int(np.count_nonzero(wrong & mask))
        counts[s], misclassified[s] = n, k
        if n == 0:
            empty.append(s)
            continue
        errors[s] = float(Fraction(k, n))

    if empty:
        logger.warning("sub-populations with no rows, excluded from the maximum: %s",
                       ", ".join(str(s) for s in empty))
    if not errors:
        raise InsufficientData("dataset has no rows to evaluate")

    worst = max(errors.values())
    argmax = frozenset(s for s, e in errors.items() if e >= worst - TIE_TOL)
    fpr = [e for s, e in errors.items() if s.label == 0]
    fnr = [e for s, e in errors.items() if s.label == 1]
    accuracy = Fraction(data.n - sum(misclassified.values()), data.n)
    return EvaluationReport(
        per_subpop_error=errors,
        max_error=worst,
        argmax_set=argmax,
        fpr_range=_range(fpr),
        fnr_range=_range(fnr),
        accuracy=float(accuracy),
        counts=counts,
        misclassified=misclassified,
        empty_subpops=tuple(empty),
    )


def boundary_grid(
    model: LinearThresholdModel,
    bbox: tuple[float, float, float, float],
    resolution: int,
) -> pd.DataFrame:
    """Predicted labels on a ``resolution`` x ``resolution`` lattice over ``bbox``.

    Rows are ordered by y, then x (row-major), with columns ``x, y, label``.
    """
    if model.dim != 2:
        raise InvalidInput(f"boundary grid needs a 2-feature model, got {model.dim}")
    xmin, ymin, xmax, ymax = (float(v) for v in bbox)
    if not (xmin < xmax and ymin < ymax):
        raise InvalidInput(f"bbox must satisfy xmin < xmax and ymin < ymax, got {bbox}")
    if resolution < 1:
        raise InvalidInput(f"resolution must be positive, got {resolution}")
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    return pd.DataFrame({"x": points[:, 0], "y": points[:, 1], "label": model.predict_many(points)})
