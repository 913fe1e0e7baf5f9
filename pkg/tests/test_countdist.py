"""Distribution layer: discrete families, continuous interpolations,
quantile <-> parameter mapping, sampling, limit relations."""

import math

import numpy as np
import pytest
from scipy import stats

import oracles
from countqr import countdist as cd
from countqr.specfun import DomainError


FAMILIES = [
    cd.Poisson(0.5),
    cd.Poisson(3.0),
    cd.Poisson(12.0),
    cd.Binomial(3, 0.5),
    cd.Binomial(10, 0.4),
    cd.Binomial(40, 0.9),
    cd.NegBinomial(1.0, 0.7),
    cd.NegBinomial(2.5, 0.6),
    cd.NegBinomial(8.0, 0.2),
]


def grid_hi(fam):
    if isinstance(fam, cd.Binomial):
        return fam.n
    if isinstance(fam, cd.Poisson):
        return int(fam.lam + 10 * math.sqrt(fam.lam) + 10)
    mean = fam.r * fam.p / (1.0 - fam.p)
    return int(mean + 10 * math.sqrt(mean + 1) + 10)


class TestFamilyValidation:
    def test_poisson_rejects_bad_rate(self):
        for lam in (0.0, -1.0, math.nan, math.inf):
            with pytest.raises(DomainError):
                cd.Poisson(lam)

    def test_binomial_rejects_bad_params(self):
        with pytest.raises(DomainError):
            cd.Binomial(0, 0.5)
        with pytest.raises(DomainError):
            cd.Binomial(3.5, 0.5)
        for p in (0.0, 1.0, -0.2, math.nan):
            with pytest.raises(DomainError):
                cd.Binomial(3, p)

    def test_negbinomial_rejects_bad_params(self):
        with pytest.raises(DomainError):
            cd.NegBinomial(0.0, 0.5)
        for p in (0.0, 1.0, 1.5):
            with pytest.raises(DomainError):
                cd.NegBinomial(2.0, p)

    def test_families_are_immutable(self):
        fam = cd.Poisson(2.0)
        with pytest.raises(AttributeError):
            fam.lam = 3.0

    def test_shapes_build_families(self):
        assert cd.PoissonShape().with_param(2.0) == cd.Poisson(2.0)
        assert cd.BinomialShape(5).with_param(0.3) == cd.Binomial(5, 0.3)
        assert cd.NegBinomialShape(2.0).with_param(0.6) == cd.NegBinomial(2.0, 0.6)

    def test_support(self):
        assert cd.support(cd.Poisson(1.0)) == (-1.0, math.inf)
        assert cd.support(cd.Binomial(7, 0.2)) == (-1.0, 7.0)
        assert cd.support(cd.NegBinomial(2.0, 0.3)) == (-1.0, math.inf)


class TestDiscretePmf:
    def test_poisson_at_zero(self):
        assert cd.discrete_pmf(cd.Poisson(2.0), 0) == pytest.approx(
            math.exp(-2.0), rel=1e-14)

    def test_binomial_midpoint(self):
        assert cd.discrete_pmf(cd.Binomial(4, 0.5), 2) == pytest.approx(
            0.375, rel=1e-14)

    def test_geometric_case(self):
        # r = 1 with success probability 0.3 means p = 0.7 in this
        # orientation: mass at k=2 is 0.3 * 0.7^2
        fam = cd.NegBinomial(1.0, 0.7)
        assert cd.discrete_pmf(fam, 2) == pytest.approx(0.147, rel=1e-14)

    def test_log_space_evaluation_far_out(self):
        assert cd.discrete_pmf(cd.Poisson(50.0), 60) == pytest.approx(
            0.020104872145676234, rel=1e-13)
        assert cd.discrete_pmf(cd.Binomial(40, 0.9), 35) == pytest.approx(
            0.16470963475295924, rel=1e-13)
        assert cd.discrete_pmf(cd.NegBinomial(2.5, 0.6), 4) == pytest.approx(
            0.1183387545988211, rel=1e-13)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_matches_oracle(self, fam):
        for k in range(0, min(grid_hi(fam), 25) + 1):
            if isinstance(fam, cd.Poisson):
                want = float(oracles.poisson_pmf(fam.lam, k))
            elif isinstance(fam, cd.Binomial):
                want = float(oracles.binomial_pmf(fam.n, fam.p, k))
            else:
                want = float(oracles.negbinomial_pmf(fam.r, fam.p, k))
            assert cd.discrete_pmf(fam, k) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_mass_sums_to_one(self, fam):
        hi = grid_hi(fam) + 40
        if isinstance(fam, cd.Binomial):
            hi = fam.n
        total = sum(cd.discrete_pmf(fam, k) for k in range(hi + 1))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            cd.discrete_pmf(cd.Poisson(2.0), -1)
        with pytest.raises(DomainError):
            cd.discrete_pmf(cd.Poisson(2.0), 1.5)
        with pytest.raises(DomainError):
            cd.discrete_pmf(cd.Binomial(3, 0.5), 4)


class TestDiscreteCdf:
    def test_anchors(self):
        assert cd.discrete_cdf(cd.Poisson(1.0), 0) == pytest.approx(
            math.exp(-1.0), rel=1e-14)
        assert cd.discrete_cdf(cd.Binomial(3, 0.5), 1) == pytest.approx(
            0.5, rel=1e-14)

    def test_frozen_oracle_values(self):
        assert cd.discrete_cdf(cd.Poisson(5.0), 7) == pytest.approx(
            0.8666283259299927, rel=1e-12)
        assert cd.discrete_cdf(cd.Binomial(10, 0.4), 3) == pytest.approx(
            0.38228060159999994, rel=1e-12)
        assert cd.discrete_cdf(cd.NegBinomial(2.5, 0.6), 4) == pytest.approx(
            0.6741406761500155, rel=1e-12)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_equals_pmf_cumsum(self, fam):
        acc = 0.0
        for k in range(0, min(grid_hi(fam), 30) + 1):
            acc += cd.discrete_pmf(fam, k)
            assert cd.discrete_cdf(fam, k) == pytest.approx(acc, abs=1e-12)

    def test_edges(self):
        assert cd.discrete_cdf(cd.Poisson(2.0), -1) == 0.0
        assert cd.discrete_cdf(cd.Binomial(3, 0.5), 3) == 1.0
        assert cd.discrete_cdf(cd.Binomial(3, 0.5), 99) == 1.0
        # real k floors
        f15 = cd.discrete_cdf(cd.Poisson(2.0), 1.7)
        assert f15 == cd.discrete_cdf(cd.Poisson(2.0), 1)


class TestContinuousCdf:
    @pytest.mark.parametrize("fam", FAMILIES)
    def test_interpolates_discrete_cdf(self, fam):
        # the defining property: equality at every integer of the support
        for k in range(0, grid_hi(fam) + 1):
            gap = abs(cd.continuous_cdf(fam, float(k)) - cd.discrete_cdf(fam, k))
            assert gap <= 1e-10

    def test_anchors(self):
        assert cd.continuous_cdf(cd.Poisson(2.0), 0.0) == pytest.approx(
            math.exp(-2.0), rel=1e-13)
        assert cd.continuous_cdf(cd.Binomial(3, 0.5), 1.0) == pytest.approx(
            0.5, rel=1e-13)

    def test_between_integers(self):
        fam = cd.Poisson(3.0)
        f1 = cd.continuous_cdf(fam, 1.0)
        fmid = cd.continuous_cdf(fam, 1.5)
        f2 = cd.continuous_cdf(fam, 2.0)
        assert f1 < fmid < f2
        assert fmid == pytest.approx(0.3062189184132784, rel=1e-12)
        assert f1 == pytest.approx(0.19914827347145577, rel=1e-12)
        assert f2 == pytest.approx(0.42319008112684352, rel=1e-12)

    def test_pmf_difference_identity(self):
        # Poisson interpolation satisfies F(k) - F(k-1) = pmf(k)
        fam = cd.Poisson(4.0)
        for k in range(0, 20):
            diff = (cd.continuous_cdf(fam, float(k))
                    - cd.continuous_cdf(fam, float(k - 1)))
            assert diff == pytest.approx(cd.discrete_pmf(fam, k), abs=1e-10)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_support_edges(self, fam):
        assert cd.continuous_cdf(fam, -1.0) == 0.0
        assert cd.continuous_cdf(fam, -5.0) == 0.0
        lo_tail = cd.continuous_cdf(fam, -0.999)
        assert 0.0 <= lo_tail < 0.2
        if isinstance(fam, cd.Binomial):
            assert cd.continuous_cdf(fam, float(fam.n)) == 1.0
            assert cd.continuous_cdf(fam, fam.n + 2.0) == 1.0

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_nondecreasing(self, fam):
        hi = min(grid_hi(fam), 25)
        xs = np.linspace(-0.99, hi, 120)
        vals = [cd.continuous_cdf(fam, float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            cd.continuous_cdf(cd.Poisson(2.0), math.nan)


class TestContinuousQuantile:
    def test_mass_point_returns_exact_integer(self):
        lam = -math.log(0.3)
        assert cd.continuous_quantile(cd.Poisson(lam), 0.3) == 0.0
        assert cd.continuous_quantile(cd.Binomial(3, 0.5), 0.5) == 1.0

    def test_frozen_oracle_roots(self):
        got = cd.continuous_quantile(cd.Poisson(4.0), 0.9)
        assert got == pytest.approx(6.1395547519639008, abs=1e-10)
        got = cd.continuous_quantile(cd.Poisson(7.0), 0.1)
        assert got == pytest.approx(3.2404903422338814, abs=1e-10)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_round_trip_with_cdf(self, fam):
        for alpha in (0.02, 0.1, 0.3, 0.5, 0.77, 0.95, 0.999):
            x = cd.continuous_quantile(fam, alpha)
            assert cd.continuous_cdf(fam, x) == pytest.approx(alpha, abs=1e-10)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_equivariance_with_discrete_quantile(self, fam):
        # ceil of the continuous quantile is the discrete quantile, for
        # alpha away from discrete mass points
        for alpha in (0.03, 0.11, 0.42, 0.68, 0.93):
            near_mass = any(
                abs(cd.discrete_cdf(fam, k) - alpha) < 1e-9
                for k in range(0, grid_hi(fam) + 1))
            if near_mass:
                continue
            cq = cd.continuous_quantile(fam, alpha)
            assert math.ceil(cq) == cd.discrete_quantile(fam, alpha)

    def test_monotone_in_alpha(self):
        fam = cd.NegBinomial(2.5, 0.6)
        qs = [cd.continuous_quantile(fam, a)
              for a in np.linspace(0.05, 0.95, 19)]
        assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_domain_errors(self):
        for alpha in (0.0, 1.0, -0.5, 1.5):
            with pytest.raises(DomainError):
                cd.continuous_quantile(cd.Poisson(2.0), alpha)


class TestQuantileParamMapping:
    def test_poisson_zero_quantile_closed_form(self):
        # F(0) = exp(-lam) = alpha inverts to lam = -ln(alpha)
        for alpha in (0.05, 0.25, 0.5, 0.9):
            lam = cd.map_quantile_to_param(cd.PoissonShape(), 0.0, alpha)
            assert lam == pytest.approx(-math.log(alpha), rel=1e-12)

    def test_frozen_values(self):
        lam = cd.map_quantile_to_param(cd.PoissonShape(), 3.2, 0.25)
        assert lam == pytest.approx(5.3440516793353674, rel=1e-12)
        p = cd.map_quantile_to_param(cd.BinomialShape(2), 1.0, 0.5)
        assert p == pytest.approx(0.70710678118654752, rel=1e-12)
        p = cd.map_quantile_to_param(cd.BinomialShape(2), 1.0, 0.75)
        assert p == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("shape", [cd.PoissonShape(),
                                       cd.BinomialShape(25),
                                       cd.NegBinomialShape(3.5)])
    def test_cdf_contract_on_acceptance_grid(self, shape):
        for q in (0.1, 1.7, 6.2, 20.0):
            if isinstance(shape, cd.BinomialShape) and q >= shape.n:
                continue
            for alpha in (0.05, 0.25, 0.5, 0.9):
                theta = cd.map_quantile_to_param(shape, q, alpha)
                fam = shape.with_param(theta)
                assert cd.continuous_cdf(fam, q) == pytest.approx(
                    alpha, abs=1e-8)

    @pytest.mark.parametrize("shape", [cd.PoissonShape(),
                                       cd.BinomialShape(25),
                                       cd.NegBinomialShape(3.5)])
    def test_param_quantile_round_trip(self, shape):
        for q in (0.1, 1.7, 6.2, 20.0):
            if isinstance(shape, cd.BinomialShape) and q >= shape.n:
                continue
            for alpha in (0.05, 0.25, 0.5, 0.9):
                theta = cd.map_quantile_to_param(shape, q, alpha)
                back = cd.map_param_to_quantile(shape.with_param(theta), alpha)
                assert back == pytest.approx(q, rel=1e-8)

    def test_named_inverse_anchors(self):
        assert cd.map_param_to_quantile(cd.Poisson(math.log(2.0)), 0.5) == 0.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            cd.map_quantile_to_param(cd.PoissonShape(), -1.0, 0.5)
        with pytest.raises(DomainError):
            cd.map_quantile_to_param(cd.BinomialShape(3), 3.0, 0.5)
        with pytest.raises(DomainError):
            cd.map_quantile_to_param(cd.PoissonShape(), 1.0, 0.0)
        with pytest.raises(DomainError):
            cd.map_quantile_to_param(cd.PoissonShape(), math.nan, 0.5)


class TestSampling:
    def test_deterministic_given_seed(self):
        fam = cd.Poisson(3.0)
        a = cd.sample(fam, 42, 50)
        b = cd.sample(fam, 42, 50)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, cd.sample(fam, 43, 50))

    def test_continuous_samples_within_support(self):
        fam = cd.Binomial(5, 0.4)
        draws = cd.sample(fam, 7, 500)
        assert np.all(draws > -1.0) and np.all(draws <= 5.0)

    def test_ks_against_continuous_cdf(self):
        fam = cd.Poisson(3.0)
        draws = cd.sample(fam, 2024, 10_000)
        u = np.sort([cd.continuous_cdf(fam, float(x)) for x in draws])
        n = len(u)
        k = np.arange(1, n + 1)
        d = max(np.max(k / n - u), np.max(u - (k - 1) / n))
        crit = 1.9495 / math.sqrt(n)  # asymptotic 99.9% point
        assert d < crit

    def test_ceiling_matches_discrete_pmf(self):
        fam = cd.Poisson(3.0)
        draws = cd.sample_discrete(fam, 99, 10_000)
        hi = 12
        observed = np.array([(draws == k).sum() for k in range(hi)]
                            + [(draws >= hi).sum()], dtype=float)
        expected = np.array([cd.discrete_pmf(fam, k) for k in range(hi)]
                            + [1.0 - cd.discrete_cdf(fam, hi - 1)])
        expected *= len(draws)
        chi2 = np.sum((observed - expected) ** 2 / expected)
        assert chi2 < stats.chi2.ppf(0.999, df=hi)

    def test_discrete_samples_are_nonnegative_integers(self):
        draws = cd.sample_discrete(cd.NegBinomial(2.5, 0.6), 5, 400)
        assert np.all(draws >= 0)
        assert np.all(draws == np.floor(draws))


@pytest.fixture(scope="module")
def report():
    return cd.verify_limit_relations()


class TestVerifyLimitRelations:

    def test_passes(self, report):
        assert report.passed

    def test_gaps_strictly_decreasing(self, report):
        for gaps in (report.binomial_gaps, report.negbin_gaps):
            for seq in gaps.values():
                assert seq[0] > seq[1] > seq[2]

    def test_final_gap_small(self, report):
        for gaps in (report.binomial_gaps, report.negbin_gaps):
            for seq in gaps.values():
                assert seq[-1] < 5e-3

    def test_identity_pointwise(self, report):
        assert report.identity_max_gap <= 1e-10

    def test_identity_single_point(self):
        # s=3, r=2, p=0.4: negbin CDF vs the mirrored binomial tail
        lhs = cd.continuous_cdf(cd.NegBinomial(2.0, 0.4), 3.0)
        rhs = 1.0 - cd.continuous_cdf(cd.Binomial(5, 0.6), 1.0)
        assert abs(lhs - rhs) < 1e-10
