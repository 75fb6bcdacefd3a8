"""Group-blind, accuracy-oriented linear classifier used as the black box being adapted."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.linalg import solve

from rawlsian.core.models import LinearThresholdModel
from rawlsian.core.types import LabeledDataset
from rawlsian.errors import InsufficientData, NonSeparable

logger = logging.getLogger(__name__)

RIDGE = 1e-9


def fit_pooled_lda(data: LabeledDataset) -> LinearThresholdModel:
    """Linear discriminant analysis on the pooled data, ignoring the protected group.

    Both classes share the pooled within-class covariance Σ; the model is
    w = Σ⁻¹(μ₁ − μ₀), b = w·(μ₀ + μ₁)/2 − log(π₁/π₀).
    """
    x0 = data.features[data.y == 0]
    x1 = data.features[data.y == 1]
    if len(x0) < 1 or len(x1) < 1:
        raise InsufficientData("pooled LDA needs rows of both labels")
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    scatter = (x0 - mu0).T @ (x0 - mu0) + (x1 - mu1).T @ (x1 - mu1)
    cov = scatter / data.n
    cov += (RIDGE * max(np.trace(cov) / data.d, 1.0)) * np.eye(data.d)

    w = solve(cov, mu1 - mu0, assume_a="pos")
    if not np.any(w):
        raise NonSeparable("pooled class means coincide")
    prior = math.log(len(x1) / len(x0))
    b = float(w @ (mu0 + mu1) / 2.0) - prior
    logger.debug("pooled LDA: w=%s b=%.6g", np.array2string(w, precision=4), b)
    return LinearThresholdModel(w=w, b=b, method="external")
