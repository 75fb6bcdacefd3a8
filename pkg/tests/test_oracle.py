# tests/test_oracle.py
"""Tests for the exact Rawls oracle on finite distributions."""

import logging

import numpy as np
import pytest

from rawlsian.core.types import SubPopId
from rawlsian.errors import DomainTooLarge, InvalidInput
from rawlsian.oracle import (
    DualWeights,
    FiniteDistribution,
    TabularClassifier,
    atom_bound,
    binding_counterexamples,
    brute_force_rawls,
    dual_classifier,
    dual_grid_maximize,
    dual_value,
    error_rates,
    max_error,
    max_error_dual,
    random_distribution,
    rawls_threshold_p1,
    relaxed_rawls,
    unveil,
)

S01, S11 = SubPopId(0, 1), SubPopId(1, 1)


def weights(c0: float, c1: float) -> DualWeights:
    return DualWeights({S01: c0, S11: c1})


class TestFiniteDistribution:
    def test_masses_must_sum_to_one(self):
        with pytest.raises(InvalidInput, match="sum to 1"):
            FiniteDistribution.from_records(["a"], 1, [("a", 1, 1, 0.5), ("a", 0, 1, 0.4)])

    def test_every_subpop_needs_mass(self):
        with pytest.raises(InvalidInput, match=r"\(0,1\) has zero mass"):
            FiniteDistribution.from_records(["a"], 1, [("a", 1, 1, 1.0)])

    def test_unknown_point(self):
        with pytest.raises(InvalidInput, match="unknown point"):
            FiniteDistribution.from_records(["a"], 1, [("z", 1, 1, 1.0)])

    def test_random_distribution_respects_min_mass(self):
        rng = np.random.Generator(np.random.Philox(1))
        for _ in range(20):
            dist = random_distribution(rng, 6, p=2)
            assert dist.subpop_mass().min() >= 0.02
            assert dist.mass.sum() == pytest.approx(1.0, abs=1e-12)


class TestUnveil:
    def test_revealing(self, revealing):
        table = unveil(revealing)
        assert table.eta_of(0, S11) == 1.0
        assert table.eta_of(1, S01) == 1.0

    def test_two_point_ratios(self, two_point):
        table = unveil(two_point)
        assert table.u_of(0, S11) == pytest.approx(1.6)
        assert table.u_of(0, S01) == pytest.approx(0.4)
        assert table.u_of(1, S11) == pytest.approx(0.4)
        assert table.u_of(1, S01) == pytest.approx(1.6)

    def test_eta_sums_to_one(self):
        dist = random_distribution(np.random.Generator(np.random.Philox(5)), 8, p=2)
        table = unveil(dist)
        support = table.marginal_x > 0
        np.testing.assert_allclose(table.eta[support].sum(axis=(1, 2)), 1.0, atol=1e-12)

    def test_u_has_unit_expectation(self):
        dist = random_distribution(np.random.Generator(np.random.Philox(6)), 8, p=2)
        table = unveil(dist)
        np.testing.assert_allclose(table.marginal_x @ table.u.reshape(8, -1), 1.0, atol=1e-10)


class TestErrorRates:
    def test_bayes_on_revealing(self, revealing):
        rates = error_rates(revealing, TabularClassifier((1, 0)))
        assert rates == {S01: 0.0, S11: 0.0}

    def test_two_point(self, two_point):
        rates = error_rates(two_point, TabularClassifier((1, 0)))
        assert rates[S11] == pytest.approx(0.2)
        assert rates[S01] == pytest.approx(0.2)

    def test_constant_one(self, two_point):
        rates = error_rates(two_point, TabularClassifier.constant(1, 2))
        assert rates[S01] == pytest.approx(1.0)
        assert rates[S11] == pytest.approx(0.0)

    def test_classifier_must_cover_domain(self, two_point):
        with pytest.raises(InvalidInput):
            error_rates(two_point, TabularClassifier((1,)))


class TestMaxErrorDual:
    def test_uniform_weights(self, two_point):
        assert max_error_dual(two_point, TabularClassifier((1, 0)), weights(0.5, 0.5)) == pytest.approx(0.2)

    def test_zero_weights(self, two_point):
        assert max_error_dual(two_point, TabularClassifier((1, 1)), weights(0.0, 0.0)) == 0.0

    def test_vertex_maximum_equals_max_error(self):
        rng = np.random.Generator(np.random.Philox(11))
        for _ in range(25):
            dist = random_distribution(rng, 5, p=2)
            f = TabularClassifier(tuple(int(v) for v in rng.integers(0, 2, size=5)))
            best = max(max_error_dual(dist, f, DualWeights.vertex(s, 2)) for s in dist.subpops)
            assert best == pytest.approx(max_error(dist, f), abs=1e-12)


class TestBruteForce:
    def test_two_point(self, two_point):
        sol = brute_force_rawls(two_point)
        assert sol.r_star == pytest.approx(0.2)
        assert [f.assignment for f in sol.optima] == [(1, 0)]
        assert sol.argmax_sets == [frozenset({S01, S11})]
        assert not sol.truncated

    def test_revealing(self, revealing):
        assert brute_force_rawls(revealing).r_star == 0.0

    def test_single_point_only_trivial_optima(self):
        dist = FiniteDistribution.from_records(["x"], 1, [("x", 1, 1, 0.5), ("x", 0, 1, 0.5)])
        sol = brute_force_rawls(dist)
        assert sol.r_star == 1.0
        assert sorted(f.assignment for f in sol.optima) == [(0,), (1,)]
        assert all(f.is_trivial for f in sol.optima)
        assert binding_counterexamples(dist, sol) == []

    def test_domain_limit(self):
        points = [f"x{k}" for k in range(5)]
        records = [(x, y, 1, 0.1) for x in points for y in (0, 1)]
        dist = FiniteDistribution.from_records(points, 1, records)
        with pytest.raises(DomainTooLarge, match="limited to 4"):
            brute_force_rawls(dist, max_domain=4)

    def test_optima_capped_and_flagged(self):
        # every classifier ties when all points are identical in distribution
        points = [f"x{k}" for k in range(4)]
        records = [(x, y, 1, 0.125) for x in points for y in (0, 1)]
        sol = brute_force_rawls(FiniteDistribution.from_records(points, 1, records), max_optima=3)
        assert len(sol.optima) == 3
        assert sol.truncated
        assert sol.n_optima > 3


class TestDual:
    def test_value_at_half(self, two_point):
        assert dual_value(two_point, weights(0.5, 0.5)) == pytest.approx(0.2)

    def test_zero_weights(self, two_point):
        assert dual_value(two_point, weights(0.0, 0.0)) == 0.0

    def test_all_weight_on_positive_class(self, two_point):
        assert dual_value(two_point, weights(0.0, 1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_dual_classifier_ties_predict_one(self, two_point):
        assert dual_classifier(two_point, weights(0.0, 0.0)).assignment == (1, 1)

    def test_grid_two_point(self, two_point):
        res = dual_grid_maximize(two_point, 1000)
        assert res.value == pytest.approx(0.2, abs=1e-3)
        assert dual_value(two_point, res.c_star) == pytest.approx(res.value, abs=1e-12)
        # the maximizers form the segment c_0 in [0.2, 0.8]; the lexicographically smallest is returned
        assert res.c_star.c[S01] == pytest.approx(0.2, abs=1e-3)
        assert res.grid_points == 1001

    def test_grid_revealing(self, revealing):
        assert dual_grid_maximize(revealing, 1000).value == pytest.approx(0.0, abs=1e-3)

    def test_grid_rejects_many_subpops(self):
        dist = random_distribution(np.random.Generator(np.random.Philox(2)), 4, p=3)
        with pytest.raises(DomainTooLarge):
            dual_grid_maximize(dist, 10)

    def test_grid_p2_weak_duality(self):
        dist = random_distribution(np.random.Generator(np.random.Philox(4)), 6, p=2)
        res = dual_grid_maximize(dist, 60)
        assert res.value <= brute_force_rawls(dist).r_star + 1e-12
        assert res.value <= relaxed_rawls(dist).value + 1e-7


class TestThresholdRule:
    def test_half_weights(self, two_point):
        rule = rawls_threshold_p1(two_point, weights(0.5, 0.5))
        assert rule.t == pytest.approx(0.5)
        assert rule.f.assignment == (1, 0)

    def test_all_positive_weight(self, two_point):
        rule = rawls_threshold_p1(two_point, weights(0.0, 1.0))
        assert rule.t == 0.0
        assert rule.f.assignment == (1, 1)

    def test_all_negative_weight(self, two_point):
        rule = rawls_threshold_p1(two_point, weights(1.0, 0.0))
        assert rule.t == 1.0
        assert rule.f.assignment == (0, 0)

    def test_zero_weights_rejected(self, two_point):
        with pytest.raises(InvalidInput, match="both weights are zero"):
            rawls_threshold_p1(two_point, weights(0.0, 0.0))


class TestRelaxed:
    def test_two_point(self, two_point):
        res = relaxed_rawls(two_point)
        assert res.value == pytest.approx(0.2, abs=1e-9)
        assert sum(res.c_star.c.values()) == pytest.approx(1.0)

    def test_atom_bound(self, two_point):
        assert atom_bound(two_point) == pytest.approx(0.8)


def test_binding_counterexamples_logged(caplog):
    # one non-trivial optimum binds only the negative class
    dist = FiniteDistribution.from_records(
        ["a", "b"], 1, [("a", 1, 1, 0.5), ("a", 0, 1, 0.1), ("b", 0, 1, 0.4)],
    )
    sol = brute_force_rawls(dist)
    assert sol.r_star == pytest.approx(0.2)
    with caplog.at_level(logging.WARNING, logger="rawlsian.oracle.rawls"):
        found = binding_counterexamples(dist, sol)
    assert [f.assignment for f, _ in found] == [(1, 0)]
    assert found[0][1] == frozenset({S01})
    assert "attains" in caplog.text


@pytest.mark.slow
class TestDualitySuite:
    """Seeded property checks over random p=1 instances with small domains."""

    N = 200
    RESOLUTION = 2000

    @pytest.fixture(scope="class")
    def instances(self):
        rng = np.random.Generator(np.random.Philox(2024))
        return [random_distribution(rng, int(rng.integers(2, 11)), p=1) for _ in range(self.N)]

    def test_grid_matches_relaxed_value(self, instances):
        for dist in instances:
            grid = dual_grid_maximize(dist, self.RESOLUTION)
            relaxed = relaxed_rawls(dist)
            assert grid.value <= relaxed.value + 1e-7
            assert relaxed.value - grid.value <= 2 * dist.p / self.RESOLUTION + 1e-7

    def test_deterministic_rate_sandwiched(self, instances):
        for dist in instances:
            r_star = brute_force_rawls(dist).r_star
            value = relaxed_rawls(dist).value
            assert value - 1e-7 <= r_star <= value + atom_bound(dist) + 1e-7

    def test_relaxed_optimum_binds_both_classes(self, instances):
        for dist in instances:
            res = relaxed_rawls(dist)
            assert res.errors[S01] == pytest.approx(res.errors[S11], abs=1e-6)
            assert max(res.errors.values()) == pytest.approx(res.value, abs=1e-6)

    def test_threshold_rule_minimizes_weighted_error(self, instances):
        for dist in instances:
            res = relaxed_rawls(dist)
            rule = rawls_threshold_p1(dist, res.c_star)
            assert max_error_dual(dist, rule.f, res.c_star) == pytest.approx(res.value, abs=1e-6)
            # the rule departs from the relaxed optimum only on tie points
            assert max_error(dist, rule.f) <= res.value + atom_bound(dist) + 1e-7

    def test_error_identity_holds_everywhere(self, instances):
        rng = np.random.Generator(np.random.Philox(7))
        for dist in instances[:50]:
            f = TabularClassifier(tuple(int(v) for v in rng.integers(0, 2, size=dist.n)))
            error_rates(dist, f)  # raises OracleInconsistency on disagreement

    def test_one_sided_optima_lose_to_the_relaxation(self, instances, caplog):
        found_total = 0
        with caplog.at_level(logging.WARNING, logger="rawlsian.oracle.rawls"):
            for dist in instances:
                sol = brute_force_rawls(dist)
                value = relaxed_rawls(dist).value
                found = binding_counterexamples(dist, sol)
                found_total += len(found)
                if found:
                    # a one-sided optimum is never optimal for the relaxation
                    assert sol.r_star > value + 1e-9
                for f, worst in found:
                    assert not f.is_trivial
                    assert max_error(dist, f) == pytest.approx(sol.r_star, abs=1e-12)
                    assert {s.label for s in worst} != {0, 1}
        warnings = [r for r in caplog.records if "attains" in r.getMessage()]
        assert len(warnings) == found_total
