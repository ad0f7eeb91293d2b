"""The seven ROC model families and their fitted surfaces."""

import numpy as np
import pytest

import roccut as rc
from roccut.estimators import BichisqParams
from roccut.exceptions import (
    DegenerateSampleError,
    DomainViolationError,
    InvalidArgumentError,
    NumericFailureError,
    UnsupportedModelError,
    UnsupportedQueryError,
)


class TestEmpirical:
    def test_perfect_separation(self):
        est = rc.EmpiricalRoc().fit_sample(rc.Sample([1, 2, 3], [4, 5, 6]))
        assert est.auc() == 1.0

    def test_identical_groups(self):
        est = rc.EmpiricalRoc().fit_sample(rc.Sample([1, 2, 3], [1, 2, 3]))
        assert est.auc() == 0.5

    def test_medium_binormal_recovery(self):
        gen = rc.rng_stream(30, 0)
        est = rc.EmpiricalRoc().fit_sample(rc.Sample(gen.normal(0, 1, 100), gen.normal(1, 1, 100)))
        assert abs(est.auc() - 0.760) < 0.06

    def test_covariates_rejected(self):
        sample = rc.Sample([1, 2, 3], [4, 5, 6], [0, 1, 0], [1, 0, 1])
        with pytest.raises(UnsupportedModelError):
            rc.EmpiricalRoc().fit_sample(sample)


class TestKernel:
    def test_shift_monotone_auc(self):
        gen = rc.rng_stream(31, 0)
        y0 = gen.normal(0, 1, 150)
        aucs = []
        for delta in (0.0, 0.5, 1.0):
            est = rc.KernelRoc().fit_sample(rc.Sample(y0, y0 + delta))
            aucs.append(est.auc())
        assert aucs[0] == pytest.approx(0.5, abs=1e-6)
        assert aucs[0] < aucs[1] < aucs[2]

    def test_high_level_recovery(self):
        gen = rc.rng_stream(32, 0)
        est = rc.KernelRoc().fit_sample(
            rc.Sample(gen.normal(0, 1, 100), gen.normal(2.5, 1, 100))
        )
        assert abs(est.auc() - 0.961) < 0.03

    def test_degenerate_group(self):
        with pytest.raises(DegenerateSampleError):
            rc.KernelRoc().fit_sample(rc.Sample([1.0, 1.0, 1.0], [2.0, 3.0, 4.0]))


class TestBigamma:
    def test_fit_recovers_low_auc(self):
        gen = rc.rng_stream(33, 0)
        sample = rc.Sample(gen.gamma(0.5, 0.1, 5000), gen.gamma(0.5, 0.15, 5000))
        est = rc.BigammaRoc().fit_sample(sample)
        assert abs(est.auc() - 0.564) < 0.02

    def test_equal_parameters_chance(self):
        gen = rc.rng_stream(34, 0)
        sample = rc.Sample(gen.gamma(0.5, 0.1, 3000), gen.gamma(0.5, 0.1, 3000))
        est = rc.BigammaRoc().fit_sample(sample)
        assert abs(est.auc() - 0.5) < 0.02

    def test_evaluation_only_path(self):
        est = rc.BigammaRoc.from_params(0.5, 0.1, 7.0)
        assert abs(est.auc() - 0.924) < 5e-4

    def test_nonpositive_data_rejected(self):
        with pytest.raises(DomainViolationError):
            rc.BigammaRoc().fit_sample(rc.Sample([0.0, 1.0, 2.0], [1.0, 2.0, 3.0]))


class TestBinormal:
    def test_medium_recovery(self, binormal_data):
        y0, y1 = binormal_data
        est = rc.BinormalRoc(seed=7).fit_sample(rc.Sample(y0, y1))
        assert abs(est.auc() - 0.760) < 0.02

    def test_exchangeable_groups_chance(self):
        gen = rc.rng_stream(35, 0)
        est = rc.BinormalRoc(seed=8, iterations=2000, burn_in=500, thin=1).fit_sample(
            rc.Sample(gen.normal(0, 1, 400), gen.normal(0, 1, 400))
        )
        assert abs(est.auc() - 0.5) < 0.03

    def test_covariate_recovery_table6(self):
        gen = rc.rng_stream(36, 3)
        n = 500
        x0 = gen.uniform(-0.5, 1.5, n)
        x1 = gen.uniform(-0.5, 1.5, n)
        y0 = gen.normal(1.0 + 1.0 * x0, 1.0)
        y1 = gen.normal(1.5 + 2.0 * x1, 1.0)
        est = rc.BinormalRoc(seed=9).fit_sample(rc.Sample(y0, y1, x0, x1))
        assert abs(rc.auc_at_x(est, 0.0).mean - 0.638) < 0.02
        assert abs(rc.auc_at_x(est, 1.0).mean - 0.856) < 0.02

    def test_degenerate_group(self):
        with pytest.raises(DegenerateSampleError):
            rc.BinormalRoc().fit_sample(rc.Sample([1.0, 1.0, 1.0], [2.0, 3.0, 4.0]))

    def test_no_covariate_effect_constant_auc(self):
        est = rc.BinormalRoc.from_parameter_draws(
            b00=1.0, b10=0.7, sigma0=1.0, b01=2.0, b11=0.7, sigma1=1.0
        )
        aucs = [est.auc(at_x=x) for x in (-1.0, 0.0, 2.5)]
        assert max(aucs) - min(aucs) < 1e-9

    def test_at_x_queries_validated(self, binormal_data):
        y0, y1 = binormal_data
        est = rc.BinormalRoc(seed=1, iterations=1200, burn_in=200, thin=1).fit_sample(
            rc.Sample(y0[:50], y1[:50])
        )
        with pytest.raises(UnsupportedQueryError):
            est.auc(at_x=1.0)
        with pytest.raises(UnsupportedQueryError):
            rc.roc_at_x(est, 1.0)


class TestParametricPv:
    def test_matched_parameter_identity(self):
        est = rc.ParametricPvRoc.from_parameter_draws(mu0=0.0, sigma0=1.0, mu=-2.5, sigma=1.0)
        assert est.auc() == pytest.approx(rc.normal_cdf(2.5 / np.sqrt(2)), abs=1e-12)
        assert abs(est.auc() - 0.961) < 5e-4

    def test_medium_recovery(self, binormal_data):
        y0, y1 = binormal_data
        est = rc.ParametricPvRoc(seed=11).fit_sample(rc.Sample(y0, y1))
        assert abs(est.auc() - 0.760) < 0.02

    def test_separated_sample_clamped(self):
        sample = rc.Sample([0.0, 0.1, 0.2, 0.3], [10.0, 10.1, 10.2, 10.3])
        est = rc.ParametricPvRoc(seed=12, iterations=1500, burn_in=500, thin=1).fit_sample(sample)
        draws = est.auc_draws()
        assert np.all(np.isfinite(draws))
        assert est.auc() >= 0.99


class TestSemiparametricPv:
    def test_k1_reduces_to_parametric(self, binormal_data):
        y0, y1 = binormal_data
        sample = rc.Sample(y0[:400], y1[:400])
        pv = rc.ParametricPvRoc(seed=13).fit_sample(sample)
        semi = rc.SemiparametricPvRoc(seed=13, n_components=1).fit_sample(sample)
        assert abs(pv.auc() - semi.auc()) < 0.01

    def test_null_case(self):
        gen = rc.rng_stream(37, 0)
        sample = rc.Sample(gen.normal(0, 1, 500), gen.normal(0, 1, 500))
        est = rc.SemiparametricPvRoc(seed=14, iterations=3000, burn_in=1000, thin=1).fit_sample(sample)
        assert abs(est.auc() - 0.5) < 0.05

    def test_bn_unequal_medium_recovery(self):
        gen = rc.rng_stream(38, 0)
        sample = rc.Sample(gen.normal(0, 1.2, 500), gen.normal(1, 0.5, 500))
        est = rc.SemiparametricPvRoc(seed=15).fit_sample(sample)
        assert abs(est.auc() - 0.779) < 0.03

    def test_weights_simplex_every_draw(self):
        gen = rc.rng_stream(39, 0)
        sample = rc.Sample(gen.normal(0, 1, 60), gen.normal(1, 1, 60))
        est = rc.SemiparametricPvRoc(
            seed=16, iterations=600, burn_in=200, thin=1, n_components=8
        ).fit_sample(sample)
        for tag in ("weights0", "weights"):
            w = est.chains_["pv"].stacked(tag)
            assert np.all(w >= 0)
            np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)

    def test_label_permutation_leaves_cdf_unchanged(self):
        w = np.array([[0.2, 0.5, 0.3]])
        m = np.array([[-1.0, 0.0, 2.0]])
        mix = rc.NormalMixture(w[0], m[0], 1.0)
        perm = [2, 0, 1]
        mix_p = rc.NormalMixture(w[0][perm], m[0][perm], 1.0)
        x = np.linspace(-4, 5, 101)
        np.testing.assert_allclose(mix.cdf(x), mix_p.cdf(x), atol=1e-15)

    def test_min_group_size(self):
        with pytest.raises(InvalidArgumentError):
            rc.SemiparametricPvRoc().fit_sample(rc.Sample(np.arange(5.0), np.arange(5.0) + 1))


class TestCovariatePv:
    def test_pv_covariate_recovery(self):
        gen = rc.rng_stream(40, 0)
        n = 500
        x0 = gen.uniform(-0.5, 1.5, n)
        x1 = gen.uniform(-0.5, 1.5, n)
        y0 = gen.normal(1.0 + 1.0 * x0, 1.0)
        y1 = gen.normal(1.5 + 2.0 * x1, 1.0)
        est = rc.ParametricPvRoc(seed=17).fit_sample(rc.Sample(y0, y1, x0, x1))
        assert abs(rc.auc_at_x(est, 0.0).mean - 0.638) < 0.03
        assert abs(rc.auc_at_x(est, 1.0).mean - 0.856) < 0.03

    def test_semipv_covariate_structure_runs(self):
        gen = rc.rng_stream(41, 0)
        n = 120
        x0 = gen.uniform(-0.5, 1.5, n)
        x1 = gen.uniform(-0.5, 1.5, n)
        y0 = gen.normal(x0, 1.0)
        y1 = gen.normal(1.0 + 2.0 * x1, 1.0)
        est = rc.SemiparametricPvRoc(
            seed=18, iterations=800, burn_in=300, thin=1, n_components=5
        ).fit_sample(rc.Sample(y0, y1, x0, x1))
        s0 = rc.auc_at_x(est, 0.0)
        s1 = rc.auc_at_x(est, 1.0)
        assert 0.0 < s0.lo <= s0.mean <= s0.hi < 1.0
        assert s1.mean > s0.mean  # strong covariate effect


class TestBichisq:
    def test_a_zero_reduction(self):
        # at a = 0 the closed form reduces to 1 + arcsin(-2 sqrt(lam)/(lam+1))/pi
        for lam in (2.0, 4.0):
            params = BichisqParams.from_binormal(1e-12, 1 / np.sqrt(lam))
            expected = 1 + np.arcsin(-2 * np.sqrt(lam) / (lam + 1)) / np.pi
            assert rc.bichisq_auc(params) == pytest.approx(expected, abs=1e-8)

    def test_limit_toward_b_equal_one_is_binormal(self):
        # just outside the singular zone the AUC approaches Phi(a/sqrt2)
        a, b = 1.2, 1.0 + 2e-6
        params = BichisqParams.from_binormal(a, b)
        assert rc.bichisq_auc(params) == pytest.approx(rc.normal_cdf(a / np.sqrt(2)), abs=1e-4)

    def test_endpoints(self):
        params = BichisqParams.from_binormal(1.5, 0.5)
        assert rc.bichisq_roc(params, 0.0) == 0.0
        assert rc.bichisq_roc(params, 1.0) == 1.0
        assert abs(rc.bichisq_roc(params, 1 - 1e-6) - 1.0) < 1e-6
        # the 0+ side has unbounded slope; assert monotone decay to the pinned 0
        t = np.array([1e-12, 1e-9, 1e-6, 1e-3])
        vals = rc.bichisq_roc(params, t)
        assert np.all(np.diff(vals) > 0)

    def test_concavity(self):
        params = BichisqParams.from_binormal(1.5, 0.5)
        t = np.linspace(1e-4, 1 - 1e-4, 501)
        roc = rc.bichisq_roc(params, t)
        assert np.max(np.diff(roc, 2)) <= 1e-8

    def test_closed_form_matches_curve_integral(self):
        for a, b in [(1.5, 0.5), (1.5, 2.0), (0.5, 0.7)]:
            params = BichisqParams.from_binormal(a, b)
            t = np.linspace(0, 1, 20001)
            vals = np.concatenate([[0.0], rc.bichisq_roc(params, t[1:-1]), [1.0]])
            assert np.trapezoid(vals, t) == pytest.approx(rc.bichisq_auc(params), abs=1e-5)

    def test_near_singular_b_rejected(self):
        with pytest.raises(NumericFailureError):
            BichisqParams.from_binormal(1.0, 1.0 + 1e-8)


class TestModelInvariants:
    def test_pv_binormal_equivalence_grid(self):
        t = np.linspace(0.005, 0.995, 101)
        for a in (0.2, 1.0, 2.5):
            for b in (0.5, 1.0, 1.5):
                general = rc.RocPair.general(rc.NormalDist(0, b), rc.NormalDist(a, 1.0))
                pv = rc.RocPair.placement(
                    rc.NormalDist(0, b), rc.ProbitNormalDist(-a / b, 1 / b)
                )
                np.testing.assert_allclose(
                    rc.roc_eval(pv, t), rc.roc_eval(general, t), atol=1e-10
                )

    def test_affine_equivariance_auc(self):
        # closed forms: exact invariance of (a, b) under y -> p + q y
        for p, q in [(5.0, 2.0), (-1.0, 0.5)]:
            base = rc.auc(rc.RocPair.general(rc.NormalDist(0, 1.2), rc.NormalDist(1, 0.8)))
            moved = rc.auc(
                rc.RocPair.general(
                    rc.NormalDist(p, q * 1.2), rc.NormalDist(p + q, q * 0.8)
                )
            )
            assert moved == pytest.approx(base, abs=1e-9)
        # empirical: exact; kernel: equivariant bandwidth keeps AUC within 1e-6
        gen = rc.rng_stream(42, 0)
        y0, y1 = gen.normal(0, 1, 80), gen.normal(1, 1, 80)
        emp0 = rc.EmpiricalRoc().fit_sample(rc.Sample(y0, y1)).auc()
        emp1 = rc.EmpiricalRoc().fit_sample(rc.Sample(5 + 2 * y0, 5 + 2 * y1)).auc()
        assert emp0 == emp1
        k0 = rc.KernelRoc().fit_sample(rc.Sample(y0, y1)).auc()
        k1 = rc.KernelRoc().fit_sample(rc.Sample(5 + 2 * y0, 5 + 2 * y1)).auc()
        assert k0 == pytest.approx(k1, abs=1e-6)

    def test_fit_returns_self_and_get_params(self):
        est = rc.BinormalRoc(seed=3, iterations=1200, burn_in=200, thin=1)
        assert est.get_params()["iterations"] == 1200
        gen = rc.rng_stream(43, 0)
        values = np.concatenate([gen.normal(0, 1, 30), gen.normal(1, 1, 30)])
        labels = np.r_[np.zeros(30), np.ones(30)]
        assert est.fit(values, labels) is est
        assert est.sample_.n0 == 30
