import math

import numpy as np
import pytest

from reservoir_bandits import (
    Bernoulli,
    DomainError,
    Exponential,
    GaussianKnownVariance,
    Poisson,
    binary_relative_entropy,
    parse_family,
)

ALL_FAMILIES = [Bernoulli(), GaussianKnownVariance(1.0), Poisson(), Exponential()]


def random_mean(fam, rng):
    if isinstance(fam, Bernoulli):
        return rng.uniform(0.01, 0.99)
    if isinstance(fam, GaussianKnownVariance):
        return rng.uniform(-5.0, 5.0)
    return rng.uniform(0.05, 10.0)


class TestKl:
    def test_identical_means_give_zero(self):
        for fam in ALL_FAMILIES:
            assert fam.kl(0.5, 0.5) == 0.0

    def test_bernoulli_closed_form(self):
        assert Bernoulli().kl(0.1, 0.9) == pytest.approx(0.8 * math.log(9.0), abs=1e-6)

    def test_gaussian_closed_form(self):
        assert GaussianKnownVariance(1.0).kl(0.0, 1.0) == 0.5
        assert GaussianKnownVariance(4.0).kl(1.0, 3.0) == pytest.approx(4.0 / 8.0)

    def test_poisson_closed_form(self):
        x, y = 2.0, 3.5
        assert Poisson().kl(x, y) == pytest.approx(y - x + x * math.log(x / y), rel=1e-12)

    def test_exponential_closed_form(self):
        x, y = 0.5, 2.0
        assert Exponential().kl(x, y) == pytest.approx(x / y - 1 - math.log(x / y), rel=1e-12)

    def test_bernoulli_boundary_conventions(self):
        fam = Bernoulli()
        assert fam.kl(0.0, 0.3) == pytest.approx(-math.log1p(-0.3), rel=1e-12)
        assert fam.kl(1.0, 0.3) == pytest.approx(-math.log(0.3), rel=1e-12)
        assert fam.kl(0.0, 0.0) == 0.0
        assert fam.kl(1.0, 1.0) == 0.0
        assert fam.kl(0.5, 0.0) == math.inf
        assert fam.kl(0.5, 1.0) == math.inf

    def test_domain_violation_names_the_mean(self):
        with pytest.raises(DomainError, match="theta2=1.5"):
            Bernoulli().kl(0.5, 1.5)
        with pytest.raises(DomainError, match="theta1"):
            Poisson().kl(-1.0, 2.0)
        with pytest.raises(DomainError):
            Exponential().kl(0.0, 1.0)  # closure not permitted for exponential

    def test_sigma2_must_be_positive(self):
        with pytest.raises(DomainError):
            GaussianKnownVariance(0.0)


class TestChernoffInformation:
    def test_symmetric_bernoulli_pair(self):
        info = Bernoulli().chernoff_information(0.25, 0.75)
        assert info.z_star == pytest.approx(0.5, abs=1e-6)
        assert info.value == pytest.approx(0.5 * math.log(4.0 / 3.0), abs=1e-6)
        assert not info.degenerate

    def test_degenerate_pair_flagged(self):
        for fam in ALL_FAMILIES:
            info = fam.chernoff_information(0.7, 0.7)
            assert info.value == 0.0
            assert info.z_star == 0.7
            assert info.degenerate

    def test_matches_grid_minimax_oracle(self):
        # brute-force oracle: minimize max(d(z,p), d(z,q)) on a 1e-4 grid,
        # then ternary-refine inside the winning cell
        fam = Bernoulli()
        p, q = 0.3, 0.5
        oracle = _grid_minimax(fam, p, q)
        assert fam.chernoff_information(p, q).value == pytest.approx(oracle, abs=1e-6)

    def test_equalization_at_z_star(self):
        rng = np.random.default_rng(11)
        for fam in ALL_FAMILIES:
            for _ in range(50):
                p, q = random_mean(fam, rng), random_mean(fam, rng)
                if p == q:
                    continue
                info = fam.chernoff_information(p, q)
                assert abs(fam.kl(info.z_star, p) - fam.kl(info.z_star, q)) <= 1e-8


def _grid_minimax(fam, p, q, step=1e-4):
    lo, hi = min(p, q), max(p, q)
    zs = np.arange(lo, hi + step, step)
    vals = np.array([max(fam.kl(z, p), fam.kl(z, q)) for z in zs])
    i = int(np.argmin(vals))
    a = zs[max(i - 1, 0)]
    b = zs[min(i + 1, len(zs) - 1)]
    for _ in range(200):
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        f1 = max(fam.kl(m1, p), fam.kl(m1, q))
        f2 = max(fam.kl(m2, p), fam.kl(m2, q))
        if f1 < f2:
            b = m2
        else:
            a = m1
        if b - a < 1e-13:
            break
    z = 0.5 * (a + b)
    return max(fam.kl(z, p), fam.kl(z, q))


class TestConfidenceBounds:
    def test_zero_beta_collapses_to_estimate(self):
        for fam in ALL_FAMILIES:
            assert fam.upper_conf(0.5, 10, 0.0) == 0.5
            assert fam.lower_conf(0.5, 10, 0.0) == 0.5
        assert Bernoulli().upper_conf(1.0, 3, 0.0) == 1.0

    def test_bernoulli_half_inversion(self):
        # 10 * kl(0.5, u) = 1 has the closed form u(1-u) = exp(-0.2)/4
        u_expected = 0.5 * (1.0 + math.sqrt(1.0 - math.exp(-0.2)))
        fam = Bernoulli()
        assert fam.upper_conf(0.5, 10, 1.0) == pytest.approx(u_expected, abs=1e-5)
        assert fam.lower_conf(0.5, 10, 1.0) == pytest.approx(1.0 - u_expected, abs=1e-5)

    def test_bernoulli_boundary_estimates_clamp(self):
        fam = Bernoulli()
        assert fam.upper_conf(1.0, 5, 0.5) == 1.0
        assert fam.lower_conf(0.0, 5, 0.5) == 0.0
        # the opposite sides solve -log(theta) and -log(1-theta) exactly
        assert fam.lower_conf(1.0, 5, 0.5) == pytest.approx(math.exp(-0.1), rel=1e-9)
        assert fam.upper_conf(0.0, 5, 0.5) == pytest.approx(1.0 - math.exp(-0.1), rel=1e-9)

    def test_gaussian_closed_form(self):
        fam = GaussianKnownVariance(2.0)
        assert fam.upper_conf(1.0, 4, 1.0) == pytest.approx(1.0 + math.sqrt(1.0), rel=1e-12)
        assert fam.lower_conf(1.0, 4, 1.0) == pytest.approx(1.0 - math.sqrt(1.0), rel=1e-12)

    def test_poisson_zero_estimate(self):
        # kl(0, u) = u, so the upper limit is exactly beta/n
        assert Poisson().upper_conf(0.0, 4, 2.0) == pytest.approx(0.5, rel=1e-12)
        assert Poisson().lower_conf(0.0, 4, 2.0) == 0.0

    def test_inversion_residual_and_ordering(self):
        rng = np.random.default_rng(5)
        for fam in ALL_FAMILIES:
            for _ in range(250):
                phat = random_mean(fam, rng)
                n = float(rng.integers(1, 500))
                beta = rng.uniform(0.01, 10.0)
                up = fam.upper_conf(phat, n, beta)
                lo = fam.lower_conf(phat, n, beta)
                assert lo <= phat <= up
                assert n * fam.kl(phat, up) == pytest.approx(beta, abs=1e-6)
                assert n * fam.kl(phat, lo) == pytest.approx(beta, abs=1e-6)

    def test_width_nonincreasing_in_n(self):
        rng = np.random.default_rng(6)
        for fam in ALL_FAMILIES:
            for _ in range(100):
                phat = random_mean(fam, rng)
                beta = rng.uniform(0.05, 5.0)
                widths = [
                    fam.upper_conf(phat, n, beta) - fam.lower_conf(phat, n, beta)
                    for n in (1, 2, 5, 20, 100)
                ]
                for w1, w2 in zip(widths, widths[1:]):
                    assert w2 <= w1 + 1e-12


class TestFamilyInvariants:
    def test_kl_positive_iff_distinct(self):
        rng = np.random.default_rng(7)
        for fam in ALL_FAMILIES:
            for _ in range(1000):
                t1, t2 = random_mean(fam, rng), random_mean(fam, rng)
                d = fam.kl(t1, t2)
                if t1 == t2:
                    assert d == 0.0
                else:
                    assert 0.0 < d < math.inf

    def test_kl_monotone_in_separation(self):
        rng = np.random.default_rng(8)
        for fam in ALL_FAMILIES:
            for _ in range(400):
                t = np.sort([random_mean(fam, rng) for _ in range(3)])
                if t[0] == t[1] or t[1] == t[2]:
                    continue
                assert fam.kl(t[0], t[2]) > fam.kl(t[1], t[2])
                assert fam.kl(t[0], t[1]) < fam.kl(t[0], t[2])

    def test_bernoulli_chernoff_sandwich(self):
        # (mu-x)^2/2 < d*(x,mu) < d(x,mu) < (mu-x)^2/(mu(1-mu)) for x < mu
        fam = Bernoulli()
        rng = np.random.default_rng(9)
        for _ in range(1000):
            x, mu = np.sort(rng.uniform(0.01, 0.99, 2))
            if mu - x < 1e-6:
                continue
            dstar = fam.chernoff_information(x, mu).value
            d = fam.kl(x, mu)
            gap2 = (mu - x) ** 2
            assert gap2 / 2.0 < dstar < d < gap2 / (mu * (1.0 - mu))

    def test_occupancy_entropy_inequality(self):
        # kl+((1+b)a, a) >= ((1+b)log(1+b) - b) * a on the admissible grid
        for b in np.linspace(0.1, 5.0, 100):
            for a in np.linspace(1e-4, 1.0 / (1.0 + b), 100):
                lhs = binary_relative_entropy(min((1.0 + b) * a, 1.0), a)
                rhs = ((1.0 + b) * math.log(1.0 + b) - b) * a
                assert lhs >= rhs - 1e-12


class TestSampling:
    def test_bernoulli_boundary_means_are_deterministic(self):
        fam = Bernoulli()
        rng = np.random.default_rng(0)
        assert not fam.sample(0.0, rng, 200).any()
        assert fam.sample(1.0, rng, 200).all()

    def test_bernoulli_empirical_mean(self):
        draws = Bernoulli().sample(0.3, np.random.default_rng(1), 100_000)
        assert abs(draws.mean() - 0.3) < 0.005  # 3-sigma binomial bound

    def test_other_families_match_their_mean(self):
        rng = np.random.default_rng(2)
        for fam, theta in [(GaussianKnownVariance(2.0), -1.5), (Poisson(), 3.2), (Exponential(), 0.7)]:
            draws = fam.sample(theta, rng, 50_000)
            assert abs(draws.mean() - theta) < 0.05
        with pytest.raises(DomainError):
            Exponential().sample(-1.0, rng)


class TestParseFamily:
    def test_known_specs(self):
        assert isinstance(parse_family("bernoulli"), Bernoulli)
        assert isinstance(parse_family("BERNOULLI"), Bernoulli)
        assert isinstance(parse_family("poisson"), Poisson)
        assert isinstance(parse_family("exponential"), Exponential)
        fam = parse_family("gaussian:2.5")
        assert isinstance(fam, GaussianKnownVariance) and fam.sigma2 == 2.5
        assert parse_family("gaussian").sigma2 == 1.0

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            parse_family("cauchy")
        with pytest.raises(ValueError):
            parse_family("bernoulli:0.5")
