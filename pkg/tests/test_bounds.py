import json
import math

import numpy as np
import pytest

from reservoir_bandits import (
    AlgoConfig,
    Bernoulli,
    BetaReservoir,
    DiracMixtureReservoir,
    DomainError,
    PartialFormulaError,
    UniformReservoir,
    UnsupportedPartitionError,
    c0_constant,
    compare_report,
    complexity_term,
    embed_finite_instance,
    finite_lower_bound,
    lower_bound,
    lower_bound_relaxed,
    t_star,
)
from reservoir_bandits.bounds import good_bucket_count, pool_complexity_term

BERN = Bernoulli()
UNI = UniformReservoir(0.1, 0.9)


def chernoff_oracle(fam, p, q, step=1e-4):
    """Grid minimax over z with ternary refinement in the winning cell."""
    lo, hi = min(p, q), max(p, q)
    zs = np.arange(lo, hi + step, step)
    vals = [max(fam.kl(z, p), fam.kl(z, q)) for z in zs]
    i = int(np.argmin(vals))
    a, b = zs[max(i - 1, 0)], zs[min(i + 1, len(zs) - 1)]
    for _ in range(200):
        m1, m2 = a + (b - a) / 3, b - (b - a) / 3
        if max(fam.kl(m1, p), fam.kl(m1, q)) < max(fam.kl(m2, p), fam.kl(m2, q)):
            b = m2
        else:
            a = m1
        if b - a < 1e-13:
            break
    z = 0.5 * (a + b)
    return max(fam.kl(z, p), fam.kl(z, q))


class TestLowerBound:
    def test_uniform_instance_hand_values(self):
        value, terms = lower_bound(UNI, BERN, 0.25, 0.05, return_terms=True)
        np.testing.assert_allclose(terms, [2.716917, 1.957615, 0.968473], atol=1e-5)
        assert value == pytest.approx(11.9647, abs=1e-2)

    def test_log_term_vanishes(self):
        assert lower_bound(UNI, BERN, 0.25, 1.0 / 2.4) == pytest.approx(0.0, abs=1e-12)

    def test_too_few_buckets(self):
        with pytest.raises(PartialFormulaError):
            lower_bound(UNI, BERN, 0.5, 0.05)

    def test_atomic_reservoir_refused(self):
        with pytest.raises(UnsupportedPartitionError):
            lower_bound(DiracMixtureReservoir(0.2, 0.8, 0.3), BERN, 0.25, 0.05)

    def test_mu_star_at_domain_edge_refused(self):
        with pytest.raises(DomainError):
            lower_bound(BetaReservoir(1, 1), BERN, 0.25, 0.05)  # mu* = 1

    def test_finite_reduction_via_embedding(self):
        means = [0.9, 0.7, 0.5, 0.3]
        res, alpha = embed_finite_instance(means)
        assert lower_bound(res, BERN, alpha, 0.05) == pytest.approx(
            finite_lower_bound(means, BERN, 0.05), abs=1e-9
        )


class TestRelaxedLowerBound:
    def test_zero_epsilon_reduces_to_bucket_sum(self):
        # q = 1 at eps = 0: only the sum survives, at log(1/(4 delta))
        part = UNI.buckets(0.25)
        b = part.boundaries
        expected = sum(1.0 / BERN.kl(b[i], b[0]) for i in range(2, part.m)) * math.log(1 / (4 * 0.05))
        assert good_bucket_count(UNI, 0.25, 0.0) == 1
        assert lower_bound_relaxed(UNI, BERN, 0.25, 0.0, 0.05) == pytest.approx(expected, rel=1e-12)

    def test_against_term_by_term_oracle(self):
        alpha, eps, delta = 0.25, 0.05, 0.05
        b = [UNI.quantile(1 - i * alpha) for i in range(4)] + [UNI.quantile(0.0)]
        thr = UNI.quantile(1 - alpha) - eps
        q = sum(1 for i in range(1, 5) if b[i] >= thr)
        total = (q - 1) / BERN.kl(b[1] - eps, b[0] + eps) if q >= 2 else 0.0
        total += sum(1.0 / BERN.kl(b[i], b[0] + eps) for i in range(q + 1, 4))
        oracle = total * math.log(1 / (4 * delta))
        assert lower_bound_relaxed(UNI, BERN, alpha, eps, delta) == pytest.approx(oracle, abs=1e-9)

    def test_log_term_vanishes(self):
        assert lower_bound_relaxed(UNI, BERN, 0.25, 0.05, 0.25) == pytest.approx(0.0, abs=1e-12)

    def test_shifted_mean_outside_domain(self):
        with pytest.raises(DomainError):
            lower_bound_relaxed(UNI, BERN, 0.25, 0.2, 0.05)  # mu* + eps = 1.1

    def test_q_override_and_saturation(self):
        small = lower_bound_relaxed(UNI, BERN, 0.25, 0.05, 0.05, q=2)
        auto = lower_bound_relaxed(UNI, BERN, 0.25, 0.05, 0.05)
        assert small != auto
        # q = m leaves an empty sum; the remaining first term is returned
        value = lower_bound_relaxed(UNI, BERN, 0.25, 0.05, 0.05, q=4)
        expected = 3.0 / BERN.kl(UNI.quantile(0.75) - 0.05, 0.9 + 0.05) * math.log(1 / 0.2)
        assert value == pytest.approx(expected, rel=1e-9)
        with pytest.raises(DomainError):
            lower_bound_relaxed(UNI, BERN, 0.25, 0.05, 0.05, q=5)


class TestComplexityTerm:
    def test_large_epsilon_floor_everywhere(self):
        # every max resolves to eps^2/2: H = 2/eps^2 + (m-1) * 2/eps^2
        eps = 0.79  # d* between any two boundaries is far below eps^2/2
        part = UNI.buckets(0.25)
        expected = 2.0 * part.m / eps**2
        assert complexity_term(UNI, BERN, 0.25, eps) == pytest.approx(expected, rel=1e-12)

    def test_small_epsilon_pure_chernoff_tail(self):
        eps = 1e-3
        part = UNI.buckets(0.25)
        b = part.boundaries
        expected = 2.0 / eps**2 + 2.0 / eps**2  # i=2 term: d*(b_1,b_1)=0 hits the floor
        expected += sum(1.0 / BERN.chernoff_information(b[i - 1], b[1]).value for i in range(3, part.m + 1))
        assert complexity_term(UNI, BERN, 0.25, eps) == pytest.approx(expected, rel=1e-12)

    def test_against_independent_oracle(self):
        alpha, eps = 0.25, 0.1
        b = [UNI.quantile(1 - i * alpha) for i in range(4)] + [UNI.quantile(0.0)]
        oracle = 2.0 / eps**2
        for i in range(2, 5):
            dstar = 0.0 if b[i - 1] == b[1] else chernoff_oracle(BERN, b[i - 1], b[1])
            oracle += 1.0 / max(eps**2 / 2.0, dstar)
        assert complexity_term(UNI, BERN, alpha, eps) == pytest.approx(oracle, abs=1e-9)

    def test_partition_input_and_zero_epsilon(self):
        part = UNI.buckets(0.25)
        assert complexity_term(part, BERN, epsilon=0.1) == complexity_term(UNI, BERN, 0.25, 0.1)
        with pytest.raises(DomainError):
            complexity_term(UNI, BERN, 0.25, 0.0)

    def test_pool_form(self):
        means = [0.7, 0.5, 0.3]
        eps = 0.1
        expected = 2.0 / eps**2  # the pivot arm itself sits on the floor
        expected += sum(1.0 / BERN.chernoff_information(x, 0.7).value for x in (0.5, 0.3))
        assert pool_complexity_term(means, BERN, 0.7, eps) == pytest.approx(expected, rel=1e-9)


class TestTStar:
    def test_c0_defining_residual(self):
        for gamma in (1.0, 1.2, 2.0, 3.0):
            c0 = c0_constant(gamma)
            assert abs(c0 - gamma * math.log(c0) - 1.0 - gamma / math.e) <= 1e-8

    def test_c0_value_anchor(self):
        assert c0_constant(1.2) == pytest.approx(2.5777605516837863, rel=1e-9)

    def test_monotone_in_h_and_confidence(self):
        values = np.array(
            [
                [t_star(AlgoConfig(0.05, 0.1, d), h) for h in (10, 50, 200, 1000, 5000)]
                for d in (0.2, 0.1, 0.05, 0.01, 0.001)
            ]
        )
        assert np.all(np.diff(values, axis=1) > 0)  # increasing in H_bar
        assert np.all(np.diff(values, axis=0) > 0)  # increasing in log(1/delta)

    def test_regression_anchor(self):
        h = complexity_term(UNI, BERN, 0.25, 0.1)
        cfg = AlgoConfig(0.05, 0.1, 0.05)
        assert cfg.init_pool_size() == 74
        assert t_star(cfg, h) == pytest.approx(891224.2065553606, rel=1e-9)


class TestCompareReport:
    INSTANCES = [
        (UNI, 0.25, 0.05, 0.05),
        (UniformReservoir(0.2, 0.8), 0.2, 0.02, 0.1),
        (BetaReservoir(1, 2, 0.9), 0.1, 0.05, 0.05),
    ]

    def test_fields_match_component_calculators(self):
        for res, alpha, eps, delta in self.INSTANCES:
            report = compare_report(res, BERN, alpha, eps, delta)
            lower, terms = lower_bound(res, BERN, alpha, delta, return_terms=True)
            assert report.lower == lower
            assert report.per_bucket_terms == terms
            assert report.h_bar == complexity_term(res, BERN, alpha, eps)
            assert report.t_star == t_star(AlgoConfig(alpha, eps, delta), report.h_bar)
            assert report.lower_relaxed == lower_bound_relaxed(res, BERN, alpha, eps, delta)
            assert report.n == AlgoConfig(alpha, eps, delta).init_pool_size()

    def test_relaxed_bound_none_when_infeasible(self):
        report = compare_report(UNI, BERN, 0.25, 0.2, 0.05)  # mu* + eps leaves (0,1)
        assert report.lower_relaxed is None
        assert report.lower_sum_simplified is None

    def test_json_round_trip(self):
        report = compare_report(UNI, BERN, 0.25, 0.05, 0.05)
        parsed = json.loads(json.dumps(report.to_dict()))
        assert parsed["m"] == 4
        assert parsed["lower"] == pytest.approx(report.lower)
        assert len(parsed["per_bucket_terms"]) == 3

    def test_reciprocal_ordering_of_bound_terms(self):
        # 1/d*(b_i, b_1) >= 1/d(b_i, mu*) since d* <= d and b_1 <= mu*
        for res, alpha, _, _ in self.INSTANCES:
            part = res.buckets(alpha)
            b = part.boundaries
            for i in range(2, part.m):
                dstar = BERN.chernoff_information(b[i], b[1]).value
                assert 1.0 / dstar >= 1.0 / BERN.kl(b[i], b[0])


class TestFiniteEmbedding:
    def test_random_instances_match(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            k = int(rng.integers(3, 9))
            means = np.sort(rng.uniform(0.05, 0.95, k))
            while np.min(np.diff(means)) < 1e-3:
                means = np.sort(rng.uniform(0.05, 0.95, k))
            res, alpha = embed_finite_instance(means)
            assert lower_bound(res, BERN, alpha, 0.1) == pytest.approx(
                finite_lower_bound(means, BERN, 0.1), abs=1e-9
            )

    def test_duplicate_means_rejected(self):
        with pytest.raises(DomainError):
            embed_finite_instance([0.5, 0.5, 0.7])
