"""Standard normal CDF and quantile."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from rawlsian.errors import InvalidInput

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(t: float) -> float:
    """Φ(t). ``scipy.special.ndtr`` is accurate to a few ulps across the real line."""
    if not math.isfinite(t):
        raise InvalidInput(f"normal_cdf requires a finite argument, got {t}")
    return float(ndtr(t))


def normal_quantile(q: float) -> float:
    """Φ⁻¹(q) for q in (0, 1), polished by one Newton step on :func:`normal_cdf`."""
    if not 0.0 < q < 1.0:
        raise InvalidInput(f"normal_quantile requires 0 < q < 1, got {q}")
    t = float(ndtri(q))
    density = _INV_SQRT_2PI * math.exp(-0.5 * t * t)
    if density > 1e-300:
        t -= (float(ndtr(t)) - q) / density
    return t


def normal_cdf_array(t: np.ndarray) -> np.ndarray:
    return ndtr(np.asarray(t, dtype=float))
