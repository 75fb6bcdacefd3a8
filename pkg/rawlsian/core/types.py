"""Shared domain types: sub-populations, moment tables, labeled data, evaluation reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from rawlsian.errors import InvalidInput


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InvalidInput(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, order=True)
class SubPopId:
    """Sensitive sub-population: true label ``label`` and protected group ``group`` (1-based)."""
    label: int
    group: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise InvalidInput(f"label must be 0 or 1, got {self.label}")
        if self.group < 1:
            raise InvalidInput(f"group must be >= 1, got {self.group}")

    def __str__(self) -> str:
        return f"({self.label},{self.group})"


def all_subpops(p: int) -> list[SubPopId]:
    """The 2p sub-populations in canonical order: label-major, then group."""
    return [SubPopId(i, j) for i in (0, 1) for j in range(1, p + 1)]


@dataclass(frozen=True, eq=False)
class Moments:
    """Count, mean vector and covariance of one sub-population."""
    count: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        if self.count < 0:
            raise InvalidInput(f"count must be nonnegative, got {self.count}")
        object.__setattr__(self, "mean", _frozen_array(self.mean, 1, "mean"))
        cov = np.array(self.cov, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        object.__setattr__(self, "cov", _frozen_array(cov, 2, "cov"))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def std(self) -> float:
        """Scalar standard deviation; only meaningful for d=1."""
        return float(np.sqrt(max(self.cov[0, 0], 0.0)))


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Per-sub-population second-order statistics of a score (d=1) or embedding."""
    p: int
    d: int
    entries: dict[SubPopId, Moments]

    def __post_init__(self) -> None:
        if self.p < 1:
            raise InvalidInput(f"p must be >= 1, got {self.p}")
        if self.d < 1:
            raise InvalidInput(f"d must be >= 1, got {self.d}")
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))

    def __getitem__(self, subpop: SubPopId) -> Moments:
        return self.entries[subpop]

    def __iter__(self) -> Iterator[SubPopId]:
        return iter(self.entries)

    def groups(self) -> range:
        return range(1, self.p + 1)

    def mean(self, label: int, group: int) -> np.ndarray:
        return self.entries[SubPopId(label, group)].mean

    def cov(self, label: int, group: int) -> np.ndarray:
        return self.entries[SubPopId(label, group)].cov

    def require_valid(self) -> None:
        """Raise InvalidInput listing every violation, if any."""
        from rawlsian.core.validation import validate_moment_table

        violations = validate_moment_table(self)
        if violations:
            raise InvalidInput("; ".join(str(v) for v in violations))

    def spherical_sigmas(self) -> dict[SubPopId, float]:
        """σ_ij = sqrt(trace(Σ_ij)/d): the isotropic spread with the same total variance."""
        return {
            s: float(np.sqrt(max(np.trace(m.cov), 0.0) / self.d))
            for s, m in self.entries.items()
        }

    def to_spherical(self, sigma: dict[SubPopId, float] | None = None) -> "MomentTable":
        """Same means and counts with covariances replaced by σ_ij²·I."""
        sigma = sigma if sigma is not None else self.spherical_sigmas()
        eye = np.eye(self.d)
        entries = {
            s: Moments(count=m.count, mean=m.mean, cov=(sigma[s] ** 2) * eye)
            for s, m in self.entries.items()
        }
        return MomentTable(p=self.p, d=self.d, entries=entries)

    @classmethod
    def from_scalars(cls, params: dict[SubPopId, tuple[float, float]], count: int = 0) -> "MomentTable":
        """Build a d=1 table from ``{subpop: (mean, std)}``."""
        p = max(s.group for s in params)
        entries = {
            s: Moments(count=count, mean=[mu], cov=[[sigma * sigma]])
            for s, (mu, sigma) in params.items()
        }
        return cls(p=p, d=1, entries=entries)


@dataclass(frozen=True)
class Violation:
    """One invariant violation found in a moment table."""
    subpop: SubPopId | None
    kind: str
    message: str

    def __str__(self) -> str:
        where = f"{self.subpop}: " if self.subpop is not None else ""
        return f"{where}{self.kind}: {self.message}"


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Rows of features with binary label ``y`` and 1-based group ``z``.

    ``features`` has shape (n, d); for score data d is 1.
    """
    p: int
    features: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise InvalidInput(f"features must be 2-dimensional, got shape {features.shape}")
        y = np.array(self.y, dtype=np.int64).reshape(-1)
        z = np.array(self.z, dtype=np.int64).reshape(-1)
        n = features.shape[0]
        if y.shape[0] != n or z.shape[0] != n:
            raise InvalidInput(f"row count mismatch: features {n}, y {y.shape[0]}, z {z.shape[0]}")
        if self.p < 1:
            raise InvalidInput(f"p must be >= 1, got {self.p}")
        if n and not np.isin(y, (0, 1)).all():
            raise InvalidInput("labels must be 0 or 1")
        if n and (z.min() < 1 or z.max() > self.p):
            bad = int(z[(z < 1) | (z > self.p)][0])
            raise InvalidInput(f"unknown group index {bad} (p={self.p})")
        for name, arr in (("features", features), ("y", y), ("z", z)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def mask(self, subpop: SubPopId) -> np.ndarray:
        return (self.y == subpop.label) & (self.z == subpop.group)

    def subset(self, index: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(p=self.p, features=self.features[index], y=self.y[index], z=self.z[index])


@dataclass(frozen=True)
class EvaluationReport:
    """Empirical per-sub-population error rates of one classifier."""
    per_subpop_error: dict[SubPopId, float]
    max_error: float
    argmax_set: frozenset[SubPopId]
    fpr_range: tuple[float, float]
    fnr_range: tuple[float, float]
    accuracy: float
    counts: dict[SubPopId, int] = field(default_factory=dict)
    misclassified: dict[SubPopId, int] = field(default_factory=dict)
    empty_subpops: tuple[SubPopId, ...] = ()
