"""Shared test fixtures."""

import numpy as np
import pytest

from rawlsian.core.types import MomentTable, Moments, SubPopId
from rawlsian.oracle import FiniteDistribution
from rawlsian.synth import population_moments, preset


def gaussian_table(groups: list[tuple], d: int | None = None) -> MomentTable:
    """Build a table from ``[(mu0, cov0, mu1, cov1), ...]`` (one tuple per group)."""
    entries = {}
    for j, (mu0, cov0, mu1, cov1) in enumerate(groups, start=1):
        entries[SubPopId(0, j)] = Moments(count=0, mean=np.atleast_1d(mu0), cov=np.atleast_2d(cov0))
        entries[SubPopId(1, j)] = Moments(count=0, mean=np.atleast_1d(mu1), cov=np.atleast_2d(cov1))
    d = d or len(np.atleast_1d(groups[0][0]))
    return MomentTable(p=len(groups), d=d, entries=entries)


def score_table(groups: list[tuple[float, float, float, float]]) -> MomentTable:
    """d=1 table from ``[(mu0, sigma0, mu1, sigma1), ...]``."""
    params = {}
    for j, (m0, s0, m1, s1) in enumerate(groups, start=1):
        params[SubPopId(0, j)] = (m0, s0)
        params[SubPopId(1, j)] = (m1, s1)
    return MomentTable.from_scalars(params)


@pytest.fixture
def two_point():
    """p=1 on {a, b}: a leans positive (η=0.8), b leans negative (η=0.2)."""
    return FiniteDistribution.from_records(
        ["a", "b"], 1,
        [("a", 1, 1, 0.4), ("a", 0, 1, 0.1), ("b", 1, 1, 0.1), ("b", 0, 1, 0.4)],
    )


@pytest.fixture
def revealing():
    return FiniteDistribution.from_records(["a", "b"], 1, [("a", 1, 1, 0.5), ("b", 0, 1, 0.5)])


@pytest.fixture
def symmetric_spherical():
    """p=1, μ_0=(0,0), μ_1=(2,0), unit covariances."""
    return gaussian_table([((0.0, 0.0), np.eye(2), (2.0, 0.0), np.eye(2))])


@pytest.fixture
def table1():
    return population_moments(preset("synthetic1"))


@pytest.fixture
def table2():
    return population_moments(preset("synthetic2"))


@pytest.fixture
def two_point_json(tmp_path):
    path = tmp_path / "dist.json"
    path.write_text(
        '{"points": ["a", "b"], "p": 1, "mass": ['
        '{"x": "a", "y": 1, "z": 1, "prob": 0.4}, {"x": "a", "y": 0, "z": 1, "prob": 0.1}, '
        '{"x": "b", "y": 1, "z": 1, "prob": 0.1}, {"x": "b", "y": 0, "z": 1, "prob": 0.4}]}'
    )
    return path
