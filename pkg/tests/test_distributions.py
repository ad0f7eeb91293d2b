"""Special functions, distribution objects, bandwidth, inversion, RNG streams."""

import numpy as np
import pytest
from scipy import integrate, special, stats

import roccut as rc
from roccut.exceptions import (
    BracketViolationError,
    DegenerateSampleError,
    InvalidArgumentError,
)


class TestNormalCdf:
    def test_symmetry_at_zero(self):
        assert rc.normal_cdf(0, 0, 1) == 0.5

    def test_medium_auc_value(self):
        # Phi(1/sqrt2) is the medium equal-variance binormal AUC, 0.760 at 3 dp
        assert abs(rc.normal_cdf(1 / np.sqrt(2)) - 0.760) < 5e-4

    @pytest.mark.parametrize("x", [0.5, 1.96, 3.0])
    def test_reflection_identity(self, x):
        assert rc.normal_cdf(-x) == pytest.approx(1 - rc.normal_cdf(x), abs=1e-15)

    def test_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            rc.normal_cdf(np.inf)
        with pytest.raises(InvalidArgumentError):
            rc.normal_cdf(0.0, sigma=0.0)
        with pytest.raises(InvalidArgumentError):
            rc.normal_cdf(0.0, sigma=-1.0)


class TestNormalQuantile:
    def test_median(self):
        assert rc.normal_quantile(0.5) == 0.0

    def test_upper_975(self):
        # frozen from a bisection against the high-precision erf oracle
        assert abs(rc.normal_quantile(0.975) - 1.959964) < 1e-5

    @pytest.mark.parametrize("p", [1e-6, 0.3, 1 - 1e-6])
    def test_round_trip(self, p):
        assert rc.normal_cdf(rc.normal_quantile(p)) == pytest.approx(p, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.3])
    def test_domain(self, p):
        with pytest.raises(InvalidArgumentError):
            rc.normal_quantile(p)


class TestGammaCdf:
    def test_at_zero(self):
        assert rc.gamma_cdf(0.0, 2.0, 0.5) == 0.0

    def test_exponential_special_case(self):
        assert rc.gamma_cdf(0.7, 1.0, 0.7) == pytest.approx(1 - np.exp(-1), abs=1e-12)

    def test_against_quadrature_oracle(self):
        # frozen: adaptive quadrature of the Gamma(2, 0.25) density over [0, 0.5]
        assert rc.gamma_cdf(0.5, 2.0, 0.25) == pytest.approx(0.593994150290, abs=1e-8)

    def test_negative_is_zero(self):
        assert rc.gamma_cdf(-1.0, 2.0, 1.0) == 0.0

    def test_bad_parameters(self):
        with pytest.raises(InvalidArgumentError):
            rc.gamma_cdf(1.0, 0.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            rc.gamma_cdf(1.0, 1.0, -2.0)


class TestFCdf:
    @pytest.mark.parametrize("d", [1.0, 4.0])
    def test_median_of_symmetric_df(self, d):
        assert rc.f_cdf(1.0, d, d) == pytest.approx(0.5, abs=1e-12)

    def test_one_one_closed_form(self):
        # F(1,1) cdf is (2/pi) arctan(sqrt(x)); value ties bigamma AUCs to the tables
        assert rc.f_cdf(2 / 3, 1, 1) == pytest.approx(0.4359057832, abs=1e-8)

    @pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
    def test_two_two_closed_form(self, x):
        assert rc.f_cdf(x, 2, 2) == pytest.approx(x / (1 + x), abs=1e-12)

    def test_bad_df(self):
        with pytest.raises(InvalidArgumentError):
            rc.f_cdf(1.0, 0.0, 1.0)


class TestNoncentralChisq:
    @pytest.mark.parametrize("x", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("df", [1.0, 4.0])
    def test_zero_noncentrality_reduction(self, x, df):
        assert rc.noncentral_chisq_cdf(x, df, 0.0) == pytest.approx(
            special.chdtr(df, x), abs=1e-10
        )

    def test_at_zero(self):
        assert rc.noncentral_chisq_cdf(0.0, 2.0, 3.0) == 0.0

    def test_monte_carlo_oracle(self):
        # frozen MC estimate from 1e7 draws of (Z + sqrt(2))^2, seed 12345
        mc, mc_se = 0.623992, 0.000153
        val = rc.noncentral_chisq_cdf(3.0, 1.0, 2.0)
        assert abs(val - mc) <= 3 * mc_se
        # independent library cross-check
        assert val == pytest.approx(stats.ncx2.cdf(3.0, 1, 2.0), abs=1e-9)

    def test_central_agreement_on_grid(self):
        x = np.linspace(0.0, 50.0, 101)
        np.testing.assert_allclose(
            rc.noncentral_chisq_cdf(x, 3.0, 0.0), special.chdtr(3.0, x), atol=1e-10
        )

    def test_bad_parameters(self):
        with pytest.raises(InvalidArgumentError):
            rc.noncentral_chisq_cdf(1.0, -1.0, 0.0)
        with pytest.raises(InvalidArgumentError):
            rc.noncentral_chisq_cdf(1.0, 1.0, -0.5)


class TestBivariateNormal:
    @pytest.mark.parametrize("rho", [-0.9, 0.0, 0.5])
    def test_origin_closed_form(self, rho):
        expected = 0.25 + np.arcsin(rho) / (2 * np.pi)
        assert rc.bvn_cdf(0.0, 0.0, rho) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("h", [-1.0, 0.3, 2.0])
    def test_marginalization(self, h):
        assert rc.bvn_cdf(h, 8.0, 0.4) == pytest.approx(rc.normal_cdf(h), abs=1e-8)

    def test_against_quadrature_oracle(self):
        # frozen: 2-D adaptive quadrature of the density
        assert rc.bvn_cdf(1.0, -0.5, 0.3) == pytest.approx(0.283138420244, abs=1e-8)

    def test_quadrature_sweep(self):
        rng = rc.rng_stream(99, 0)
        for _ in range(20):
            h, k = rng.normal(0, 1.5, 2)
            rho = rng.uniform(-0.95, 0.95)
            def integrand(r):
                return np.exp(
                    -(h * h - 2 * r * h * k + k * k) / (2 * (1 - r * r))
                ) / (2 * np.pi * np.sqrt(1 - r * r))
            ref = rc.normal_cdf(h) * rc.normal_cdf(k) + integrate.quad(
                integrand, 0, rho, epsabs=1e-13
            )[0]
            assert rc.bvn_cdf(h, k, rho) == pytest.approx(ref, abs=1e-10)

    def test_degenerate_rho_rejected(self):
        with pytest.raises(InvalidArgumentError):
            rc.bvn_cdf(0.0, 0.0, 1.5)


class TestSilvermanBandwidth:
    def test_two_point_hand_computation(self):
        # SD = 0.7071 (n-1), IQR = 0.5 type-7 -> 0.9*min(0.7071, 0.3731)*2^(-0.2)
        assert rc.silverman_bandwidth([0.0, 1.0]) == pytest.approx(0.29235, abs=1e-4)

    @pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
    def test_scale_equivariance(self, c):
        rng = rc.rng_stream(5, 0)
        v = rng.normal(0, 1, 50)
        assert rc.silverman_bandwidth(c * v) == pytest.approx(
            c * rc.silverman_bandwidth(v), rel=1e-12
        )

    def test_against_independent_reimplementation(self):
        rng = rc.rng_stream(17, 0)
        v = rng.normal(0, 1, 100)
        sd = np.sqrt(np.sum((v - v.mean()) ** 2) / (len(v) - 1))
        q75, q25 = np.quantile(v, 0.75), np.quantile(v, 0.25)
        expected = 0.9 * min(sd, (q75 - q25) / 1.34) * len(v) ** (-1 / 5)
        assert rc.silverman_bandwidth(v) == pytest.approx(expected, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            rc.silverman_bandwidth([3.0, 3.0, 3.0])


class TestInvertCdf:
    def test_normal_median(self):
        d = rc.NormalDist(0, 1)
        assert abs(rc.invert_cdf(d, 0.5, (-10, 10))) < 1e-9

    def test_kernel_symmetric_sample(self):
        d = rc.KernelCdf([-1.0, 0.0, 1.0], bandwidth=0.5)
        assert abs(rc.invert_cdf(d, 0.5, (-10, 10))) < 1e-6

    def test_gamma_round_trip(self):
        d = rc.GammaDist(2.0, 3.0)
        x = rc.invert_cdf(d, 0.7, (0.0, 100.0))
        assert rc.gamma_cdf(x, 2.0, 3.0) == pytest.approx(0.7, abs=1e-9)

    def test_bracket_violation(self):
        d = rc.NormalDist(0, 1)
        with pytest.raises(BracketViolationError):
            rc.invert_cdf(d, 0.99, (-1.0, 0.0))


class TestRngStreams:
    def test_determinism(self):
        a = rc.rng_stream(123, 7).standard_normal(1000)
        b = rc.rng_stream(123, 7).standard_normal(1000)
        np.testing.assert_array_equal(a, b)
        c = rc.rng_stream(123, 8).standard_normal(1000)
        assert not np.array_equal(a, c)

    def test_uniform_mean(self):
        gen = rc.rng_stream(1, 0)
        draws = rc.distributions.draw_uniform(gen, -0.5, 1.5, size=1_000_000)
        assert abs(draws.mean() - 0.5) < 0.005

    def test_normal_variance(self):
        gen = rc.rng_stream(2, 0)
        draws = rc.distributions.draw_normal(gen, 0.0, 1.0, size=1_000_000)
        assert abs(draws.var() - 1.0) < 0.01

    def test_gamma_mean(self):
        gen = rc.rng_stream(3, 0)
        draws = rc.distributions.draw_gamma(gen, 0.5, 7.0, size=1_000_000)
        assert abs(draws.mean() - 3.5) < 0.02


def _continuous_instances():
    return [
        rc.NormalDist(0.3, 1.7),
        rc.GammaDist(0.5, 0.6),
        rc.NormalMixture([0.3, 0.7], [-1.0, 2.0], [1.0, 0.5]),
        rc.KernelCdf(rc.rng_stream(4, 0).normal(0, 1, 60)),
        rc.LogNormalDist(0.2, 0.8),
        rc.ProbitNormalDist(-1.0, 0.8),
        rc.ProbitNormalMixture([0.4, 0.6], [-0.5, 0.5], 1.2),
    ]


class TestDistInvariants:
    @pytest.mark.parametrize("dist", _continuous_instances() + [
        rc.EmpiricalCdf([1.0, 1.0, 2.0, 5.0]),
        rc.SquaredNormalDist(1.0, 0.5),
        rc.SquaredNormalDist(0.5, 1.0, folded=True),
    ])
    def test_cdf_monotone_and_bounded(self, dist):
        lo, hi = dist._default_bracket()
        grid = np.linspace(lo, hi, 10_000)
        vals = dist.cdf(grid)
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals.min() >= 0.0 and vals.max() <= 1.0

    @pytest.mark.parametrize("dist", _continuous_instances())
    def test_quantile_cdf_round_trip(self, dist):
        for p in [0.05, 0.3, 0.5, 0.77, 0.95]:
            x = dist.quantile(p)
            assert dist.cdf(x) == pytest.approx(p, abs=1e-8)

    def test_mixture_equals_weighted_sum(self):
        w = np.array([0.2, 0.5, 0.3])
        mu = np.array([-1.0, 0.5, 3.0])
        sc = np.array([0.5, 1.0, 2.0])
        mix = rc.NormalMixture(w, mu, sc)
        x = np.linspace(-6, 9, 500)
        direct = sum(wi * rc.normal_cdf(x, m, s) for wi, m, s in zip(w, mu, sc))
        np.testing.assert_allclose(mix.cdf(x), direct, atol=1e-12)

    def test_mixture_weights_validated(self):
        with pytest.raises(InvalidArgumentError):
            rc.NormalMixture([0.5, 0.6], [0, 1], [1, 1])

    def test_empirical_at_order_statistics(self):
        values = np.array([2.0, 1.0, 2.0, 4.0, 7.0])
        d = rc.EmpiricalCdf(values)
        s = np.sort(values)
        for i, v in enumerate(s, start=1):
            # ties count: cdf at a tied order statistic is the top tied index / n
            expected = np.searchsorted(s, v, side="right") / len(s)
            assert d.cdf(v) == expected
        assert d.cdf(s[-1]) == 1.0

    def test_kernel_cdf_converges_to_normal(self):
        draws = rc.rng_stream(11, 0).normal(0, 1, 5000)
        d = rc.KernelCdf(draws)
        grid = np.linspace(-4, 4, 801)
        sup = np.max(np.abs(d.cdf(grid) - rc.normal_cdf(grid)))
        assert sup <= 0.03

    def test_squared_normal_is_law_of_clipped_square(self):
        mu, sigma = 0.8, 1.3
        d = rc.SquaredNormalDist(mu, sigma)
        w = rc.rng_stream(21, 0).normal(mu, sigma, 200_000)
        y = np.maximum(w, 0.0) ** 2
        grid = np.linspace(0.01, 12.0, 50)
        emp = np.searchsorted(np.sort(y), grid, side="right") / y.size
        np.testing.assert_allclose(d.cdf(grid), emp, atol=0.01)

    def test_folded_squared_normal_is_law_of_square(self):
        mu, sigma = 0.8, 1.3
        d = rc.SquaredNormalDist(mu, sigma, folded=True)
        w = rc.rng_stream(22, 0).normal(mu, sigma, 200_000)
        grid = np.linspace(0.01, 12.0, 50)
        emp = np.searchsorted(np.sort(w**2), grid, side="right") / w.size
        np.testing.assert_allclose(d.cdf(grid), emp, atol=0.01)
