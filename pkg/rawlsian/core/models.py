"""Threshold and linear-threshold classifiers.

Prediction is 1 iff the score is >= the threshold; a score exactly on the
threshold predicts 1 everywhere in the package.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from rawlsian.errors import InvalidInput

MODEL_METHODS = ("fat", "flat1", "flat2", "external")


@dataclass(frozen=True)
class Guarantee:
    """Certified worst-case sub-population error ``r_star`` attained on group ``j_star``."""
    r_star: float
    j_star: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_star <= 1.0:
            raise InvalidInput(f"r_star must lie in [0, 1], got {self.r_star}")


class ThresholdClassifier(ABC):
    """Common interface of the two model types."""

    b: float
    guarantee: Guarantee | None
    method: str

    @abstractmethod
    def score(self, x) -> np.ndarray:
        """Score of each row of ``x`` (shape (n,) or (n, d)); returns shape (n,)."""
        ...

    @property
    @abstractmethod
    def dim(self) -> int:
        """Input dimension the model expects."""
        ...

    def predict_many(self, x) -> np.ndarray:
        """Vectorized :func:`predict` over the rows of ``x``."""
        return (self.score(x) >= self.b).astype(np.int64)


@dataclass(frozen=True)
class ScoreThresholdModel(ThresholdClassifier):
    """``f_b(s) = 1{s >= b}`` on a scalar score."""
    b: float
    guarantee: Guarantee | None = None
    method: str = "external"

    @property
    def dim(self) -> int:
        return 1

    def score(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 2:
            if arr.shape[1] != 1:
                raise InvalidInput(f"threshold model expects 1 feature, got {arr.shape[1]}")
            arr = arr[:, 0]
        return np.atleast_1d(arr)


@dataclass(frozen=True, eq=False)
class LinearThresholdModel(ThresholdClassifier):
    """``f_{w,b}(x) = 1{w·x >= b}`` on a d-dimensional embedding."""
    w: np.ndarray
    b: float
    guarantee: Guarantee | None = None
    method: str = "external"

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.size == 0 or not np.any(w):
            raise InvalidInput("w must be a nonzero vector")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def score(self, x) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(x, dtype=float))
        if arr.shape[1] != self.dim:
            raise InvalidInput(f"linear model expects {self.dim} features, got {arr.shape[1]}")
        return arr @ self.w


def predict(model: ThresholdClassifier, x) -> int:
    """Label of a single input: 1 iff score(x) >= b."""
    arr = np.asarray(x, dtype=float)
    if isinstance(model, LinearThresholdModel):
        if arr.shape != (model.dim,):
            raise InvalidInput(f"expected a vector of length {model.dim}, got shape {arr.shape}")
        return int(float(arr @ model.w) >= model.b)
    if arr.size != 1:
        raise InvalidInput(f"threshold model expects a scalar score, got shape {arr.shape}")
    return int(float(arr.reshape(-1)[0]) >= model.b)
