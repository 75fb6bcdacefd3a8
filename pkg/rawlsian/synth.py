"""Seeded spherical-Gaussian benchmark datasets.

Random streams come from ``numpy.random.Philox`` (a counter-based generator)
seeded with the 64-bit ``SynthSpec.seed``; normals use NumPy's ziggurat
``standard_normal``. Streams are bit-exact for a given NumPy version.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from rawlsian.core.types import LabeledDataset, MomentTable, Moments, SubPopId
from rawlsian.errors import InvalidInput, UnknownPreset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cluster:
    """One sub-population drawn from N(mean, variance·I)."""
    subpop: SubPopId
    mean: tuple[float, ...]
    variance: float
    count: int

    def __post_init__(self) -> None:
        if self.variance <= 0:
            raise InvalidInput(f"{self.subpop}: variance must be positive, got {self.variance}")
        if self.count < 1:
            raise InvalidInput(f"{self.subpop}: count must be at least 1, got {self.count}")


@dataclass(frozen=True)
class SynthSpec:
    clusters: tuple[Cluster, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        seen = [c.subpop for c in self.clusters]
        if len(set(seen)) != len(seen):
            raise InvalidInput("each sub-population may appear in at most one cluster")
        if not self.clusters:
            raise InvalidInput("a spec needs at least one cluster")
        dims = {len(c.mean) for c in self.clusters}
        if len(dims) != 1:
            raise InvalidInput("all cluster means must share one dimension")

    @property
    def p(self) -> int:
        return max(c.subpop.group for c in self.clusters)

    def with_seed(self, seed: int) -> "SynthSpec":
        return SynthSpec(clusters=self.clusters, seed=seed)


# Group indices are 1-based: the benchmark's protected value 0 is group 1.
PRESETS: dict[str, tuple[Cluster, ...]] = {
    "synthetic1": (
        Cluster(SubPopId(0, 1), (0.0, -2.5), 2.0, 1900),
        Cluster(SubPopId(0, 2), (5.0, 3.0), 1.0, 100),
        Cluster(SubPopId(1, 1), (0.0, 3.0), 2.0, 1900),
        Cluster(SubPopId(1, 2), (2.0, 5.0), 1.0, 100),
    ),
    "synthetic2": (
        Cluster(SubPopId(0, 1), (-5.0, 0.0), 2.0, 1900),
        Cluster(SubPopId(0, 2), (-1.0, -1.0), 1.0, 100),
        Cluster(SubPopId(1, 1), (5.0, 0.0), 2.0, 1900),
        Cluster(SubPopId(1, 2), (1.0, 1.0), 1.0, 100),
    ),
}


def preset(name: str, seed: int = 0) -> SynthSpec:
    """Benchmark spec by name (``synthetic1`` or ``synthetic2``)."""
    try:
        clusters = PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}") from None
    return SynthSpec(clusters=clusters, seed=seed)


def generate(spec: SynthSpec) -> LabeledDataset:
    """Draw exactly ``count`` rows per cluster, in cluster order, from one seeded stream."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    features, ys, zs = [], [], []
    for cluster in spec.clusters:
        mean = np.asarray(cluster.mean, dtype=float)
        draws = rng.standard_normal((cluster.count, mean.shape[0]))
        features.append(mean + np.sqrt(cluster.variance) * draws)
        ys.append(np.full(cluster.count, cluster.subpop.label))
        zs.append(np.full(cluster.count, cluster.subpop.group))
    logger.debug("generated %d rows from %d clusters (seed %d)", sum(c.count for c in spec.clusters),
                 len(spec.clusters), spec.seed)
    return LabeledDataset(p=spec.p, features=np.vstack(features), y=np.concatenate(ys), z=np.concatenate(zs))


def population_moments(spec: SynthSpec) -> MomentTable:
    """The generator's true parameters as a moment table (cov = variance·I)."""
    d = len(spec.clusters[0].mean)
    entries = {
        c.subpop: Moments(count=c.count, mean=list(c.mean), cov=c.variance * np.eye(d))
        for c in spec.clusters
    }
    return MomentTable(p=spec.p, d=d, entries=entries)
