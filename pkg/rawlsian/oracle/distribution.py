"""Finite joint distributions over features × label × group, and their unveil functions."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from rawlsian.core.types import SubPopId, all_subpops
from rawlsian.errors import InvalidInput

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12
MIN_SUBPOP_MASS = 0.02


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Explicit pmf. ``mass[x, i, j-1]`` is P(X = points[x], Y = i, Z = j)."""
    points: tuple[str, ...]
    p: int
    mass: np.ndarray

    def __post_init__(self) -> None:
        points = tuple(str(x) for x in self.points)
        if len(set(points)) != len(points):
            raise InvalidInput("distribution points must be distinct")
        mass = np.array(self.mass, dtype=float)
        if mass.shape != (len(points), 2, self.p):
            raise InvalidInput(f"mass must have shape ({len(points)}, 2, {self.p}), got {mass.shape}")
        if (mass < 0).any():
            raise InvalidInput("masses must be nonnegative")
        total = float(mass.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidInput(f"masses must sum to 1, got {total!r}")
        marginals = mass.sum(axis=0)
        for i, j in zip(*np.nonzero(marginals <= 0)):
            raise InvalidInput(f"sub-population {SubPopId(int(i), int(j) + 1)} has zero mass")
        mass.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "mass", mass)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def subpops(self) -> list[SubPopId]:
        return all_subpops(self.p)

    def subpop_mass(self) -> np.ndarray:
        """p_ij as a (2, p) array."""
        return self.mass.sum(axis=0)

    def marginal_x(self) -> np.ndarray:
        return self.mass.sum(axis=(1, 2))

    def column(self, subpop: SubPopId) -> np.ndarray:
        """mass(·, i, j) over the domain."""
        return self.mass[:, subpop.label, subpop.group - 1]

    @classmethod
    def from_records(cls, points: list[str], p: int, records: list[tuple[str, int, int, float]]) -> "FiniteDistribution":
        """Build from ``(x, y, z, prob)`` records; unlisted combinations get zero mass."""
        index = {x: k for k, x in enumerate(points)}
        mass = np.zeros((len(points), 2, p))
        for x, y, z, prob in records:
            if x not in index:
                raise InvalidInput(f"mass record refers to unknown point {x!r}")
            if y not in (0, 1) or not 1 <= z <= p:
                raise InvalidInput(f"mass record ({x!r}, {y}, {z}) has invalid label or group")
            mass[index[x], y, z - 1] += prob
        return cls(points=tuple(points), p=p, mass=mass)


@dataclass(frozen=True, eq=False)
class UnveilTable:
    """η_ij(x) and u_ij(x) = η_ij(x)/p_ij as (n, 2, p) arrays, plus P(X = x)."""
    eta: np.ndarray
    u: np.ndarray
    marginal_x: np.ndarray

    def eta_of(self, x: int, subpop: SubPopId) -> float:
        return float(self.eta[x, subpop.label, subpop.group - 1])

    def u_of(self, x: int, subpop: SubPopId) -> float:
        return float(self.u[x, subpop.label, subpop.group - 1])


@dataclass(frozen=True)
class TabularClassifier:
    """A deterministic classifier on the finite domain, stored as a 0/1 tuple aligned with ``points``."""
    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v not in (0, 1) for v in self.assignment):
            raise InvalidInput("classifier assignment must be 0/1")

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "TabularClassifier":
        """Bit k of ``mask`` is the label of point k."""
        return cls(tuple((mask >> k) & 1 for k in range(n)))

    @classmethod
    def constant(cls, label: int, n: int) -> "TabularClassifier":
        return cls((label,) * n)

    def as_array(self) -> np.ndarray:
        return np.array(self.assignment, dtype=float)

    @property
    def is_trivial(self) -> bool:
        return len(set(self.assignment)) <= 1


@dataclass(frozen=True)
class DualWeights:
    """Nonnegative convex-combination weights c_ij with sum at most 1."""
    c: dict[SubPopId, float]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.c.values()):
            raise InvalidInput("dual weights must be nonnegative")
        if sum(self.c.values()) > 1.0 + 1e-12:
            raise InvalidInput(f"dual weights must sum to at most 1, got {sum(self.c.values())!r}")

    def as_array(self, p: int) -> np.ndarray:
        """Weights as a (2, p) array; missing sub-populations weigh 0."""
        arr = np.zeros((2, p))
        for s, v in self.c.items():
            arr[s.label, s.group - 1] = v
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "DualWeights":
        p = arr.shape[1]
        return cls({s: float(arr[s.label, s.group - 1]) for s in all_subpops(p)})

    @classmethod
    def vertex(cls, subpop: SubPopId, p: int) -> "DualWeights":
        return cls({s: (1.0 if s == subpop else 0.0) for s in all_subpops(p)})


def unveil(dist: FiniteDistribution) -> UnveilTable:
    """Compute η_ij(x) = P(Y=i, Z=j | X=x) and u_ij(x) = η_ij(x)/p_ij.

    Points with zero marginal are left out of the conditionals (η = u = 0 there).
    """
    marginal = dist.marginal_x()
    support = marginal > 0
    if not support.all():
        logger.debug("%d point(s) carry zero mass and are excluded", int((~support).sum()))
    eta = np.zeros_like(dist.mass)
    eta[support] = dist.mass[support] / marginal[support, None, None]
    u = eta / dist.subpop_mass()[None, :, :]
    for arr in (eta, u, marginal):
        arr.setflags(write=False)
    return UnveilTable(eta=eta, u=u, marginal_x=marginal)


def random_distribution(rng: np.random.Generator, n_points: int, p: int = 1) -> FiniteDistribution:
    """Random pmf on ``n_points`` points with every sub-population holding at least 2% of the mass."""
    if n_points < 1:
        raise InvalidInput("n_points must be positive")
    while True:
        mass = rng.exponential(size=(n_points, 2, p))
        # sparsify so that some points reveal their sub-population
        mass *= rng.random(size=mass.shape) < 0.8
        total = mass.sum()
        if total <= 0:
            continue
        mass /= total
        if mass.sum(axis=0).min() >= MIN_SUBPOP_MASS:
            break
    # renormalize once more so the sum is 1 to the last ulp available
    mass /= mass.sum()
    points = tuple(f"x{k}" for k in range(n_points))
    return FiniteDistribution(points=points, p=p, mass=mass)
