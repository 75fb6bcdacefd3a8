# tests/test_synth.py
"""Tests for the seeded synthetic benchmarks."""

import numpy as np
import pytest

from rawlsian.core.types import SubPopId
from rawlsian.errors import InvalidInput, UnknownPreset
from rawlsian.synth import Cluster, SynthSpec, generate, population_moments, preset


class TestPresets:
    def test_synthetic1_parameters(self):
        spec = preset("synthetic1")
        by_subpop = {c.subpop: c for c in spec.clusters}
        assert by_subpop[SubPopId(0, 2)].mean == (5.0, 3.0)
        assert by_subpop[SubPopId(1, 1)].variance == 2.0
        assert sum(c.count for c in spec.clusters) == 4000
        assert spec.p == 2

    def test_synthetic2_parameters(self):
        by_subpop = {c.subpop: c for c in preset("synthetic2").clusters}
        assert by_subpop[SubPopId(0, 1)].mean == (-5.0, 0.0)
        assert by_subpop[SubPopId(1, 2)].mean == (1.0, 1.0)
        assert by_subpop[SubPopId(1, 2)].count == 100

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset, match="valid presets: synthetic1, synthetic2") as exc:
            preset("synthetic3")
        assert exc.value.exit_code == 2

    def test_seed_carried(self):
        assert preset("synthetic1", seed=42).seed == 42
        assert preset("synthetic1").with_seed(7).seed == 7


class TestSpecValidation:
    def test_duplicate_subpop(self):
        c = Cluster(SubPopId(0, 1), (0.0, 0.0), 1.0, 10)
        with pytest.raises(InvalidInput, match="at most one cluster"):
            SynthSpec(clusters=(c, c))

    def test_nonpositive_variance(self):
        with pytest.raises(InvalidInput, match="variance"):
            Cluster(SubPopId(0, 1), (0.0, 0.0), 0.0, 10)

    def test_zero_count(self):
        with pytest.raises(InvalidInput, match="count"):
            Cluster(SubPopId(0, 1), (0.0, 0.0), 1.0, 0)

    def test_mixed_dimensions(self):
        with pytest.raises(InvalidInput, match="dimension"):
            SynthSpec(clusters=(
                Cluster(SubPopId(0, 1), (0.0, 0.0), 1.0, 10),
                Cluster(SubPopId(1, 1), (0.0,), 1.0, 10),
            ))


class TestGenerate:
    def test_row_layout(self):
        data = generate(preset("synthetic1", seed=42))
        assert data.n == 4000
        assert data.d == 2
        # cluster order, then index order
        assert data.y[:1900].tolist() == [0] * 1900
        assert data.z[1900:2000].tolist() == [2] * 100
        assert data.y[-1] == 1 and data.z[-1] == 2

    def test_same_seed_same_data(self):
        a = generate(preset("synthetic2", seed=5))
        b = generate(preset("synthetic2", seed=5))
        np.testing.assert_array_equal(a.features, b.features)

    def test_different_seed_different_data(self):
        a = generate(preset("synthetic2", seed=5))
        b = generate(preset("synthetic2", seed=6))
        assert not np.array_equal(a.features, b.features)

    def test_large_cluster_fidelity(self):
        n = 100_000
        spec = SynthSpec(clusters=(Cluster(SubPopId(1, 1), (0.0, 0.0), 1.0, n),), seed=11)
        x = generate(spec).features
        assert np.all(np.abs(x.mean(axis=0)) <= 4 / np.sqrt(n))
        cov = np.cov(x, rowvar=False, bias=True)
        assert abs(cov[0, 1]) <= 5 / np.sqrt(n)
        np.testing.assert_allclose(np.diag(cov), 1.0, rtol=0.05)

    def test_variance_is_sigma_squared(self):
        n = 50_000
        spec = SynthSpec(clusters=(Cluster(SubPopId(0, 1), (1.0, -1.0), 2.0, n),), seed=3)
        cov = np.cov(generate(spec).features, rowvar=False, bias=True)
        np.testing.assert_allclose(np.diag(cov), 2.0, rtol=0.05)


class TestPopulationMoments:
    def test_table1(self, table1):
        assert table1.p == 2 and table1.d == 2
        np.testing.assert_array_equal(table1.mean(0, 1), [0.0, -2.5])
        np.testing.assert_array_equal(table1.cov(1, 2), np.eye(2))
        assert table1[SubPopId(0, 1)].count == 1900

    def test_entries_cover_clusters(self):
        spec = preset("synthetic2")
        table = population_moments(spec)
        assert sorted(table.entries) == sorted(c.subpop for c in spec.clusters)
