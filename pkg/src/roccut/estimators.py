"""ROC model estimators with a scikit-learn style fit surface.

Each estimator consumes biomarker values plus binary disease labels (optionally
a single covariate) and exposes the fitted ROC machinery: a point-summary
:class:`~roccut.roc_core.RocPair`, AUC point estimates and posterior
summaries, and -- for the Bayesian models -- vectorized access to per-draw
curve families used by the cutoff optimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize as sp_optimize
from scipy import special
from sklearn.base import BaseEstimator

from . import bayes
from .bayes import Chains, DpmState, McmcConfig, NormalRegressionState, run_chains
from .distributions import (
    EmpiricalCdf,
    GammaDist,
    KernelCdf,
    NormalDist,
    NormalMixture,
    ProbitNormalDist,
    ProbitNormalMixture,
    bvn_cdf,
    invert_cdf,
    noncentral_chisq_cdf,
)
from .exceptions import (
    DegenerateSampleError,
    DomainViolationError,
    InvalidArgumentError,
    NumericFailureError,
    UnsupportedModelError,
    UnsupportedQueryError,
)
from .roc_core import HIGHER_IS_DISEASED, LOWER_IS_DISEASED, RocPair, delong_auc
from .validation import as_1d_float, check_binary_labels, check_min_size

__all__ = [
    "Sample",
    "EmpiricalRoc",
    "KernelRoc",
    "BinormalRoc",
    "BigammaRoc",
    "ParametricPvRoc",
    "SemiparametricPvRoc",
    "BichisqParams",
    "bichisq_roc",
    "bichisq_auc",
    "roc_at_x",
    "auc_at_x",
    "MODEL_REGISTRY",
]

PV_CLAMP = 1e-6  # placement values are clamped into [PV_CLAMP, 1 - PV_CLAMP]


# ---------------------------------------------------------------------------
# sample container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    """Paired healthy/diseased biomarker vectors with optional covariates."""

    y0: np.ndarray
    y1: np.ndarray
    x0: np.ndarray | None = None
    x1: np.ndarray | None = None
    orientation: str = HIGHER_IS_DISEASED

    def __post_init__(self):
        object.__setattr__(self, "y0", as_1d_float(self.y0, "y0"))
        object.__setattr__(self, "y1", as_1d_float(self.y1, "y1"))
        if (self.x0 is None) != (self.x1 is None):
            raise InvalidArgumentError("covariates must be present in both groups or neither")
        if self.x0 is not None:
            x0 = as_1d_float(self.x0, "x0")
            x1 = as_1d_float(self.x1, "x1")
            if x0.size != self.y0.size or x1.size != self.y1.size:
                raise InvalidArgumentError("covariate vectors must match their group lengths")
            object.__setattr__(self, "x0", x0)
            object.__setattr__(self, "x1", x1)
        if self.orientation not in (HIGHER_IS_DISEASED, LOWER_IS_DISEASED):
            raise InvalidArgumentError(f"unknown orientation {self.orientation!r}")

    @property
    def has_covariate(self):
        return self.x0 is not None

    @property
    def n0(self):
        return self.y0.size

    @property
    def n1(self):
        return self.y1.size

    def normalized(self):
        """Return (sample on the higher-is-diseased scale, flipped flag)."""
        if self.orientation == HIGHER_IS_DISEASED:
            return self, False
        flipped = Sample(-self.y0, -self.y1, self.x0, self.x1, HIGHER_IS_DISEASED)
        return flipped, True

    def pooled(self):
        return np.concatenate([self.y0, self.y1])

    @staticmethod
    def from_arrays(values, labels, covariate=None, orientation=HIGHER_IS_DISEASED):
        values = as_1d_float(values, "values")
        labels = check_binary_labels(labels)
        if labels.size != values.size:
            raise InvalidArgumentError("values and labels must have equal length")
        mask1 = labels == 1
        x0 = x1 = None
        if covariate is not None:
            cov = as_1d_float(covariate, "covariate")
            if cov.size != values.size:
                raise InvalidArgumentError("covariate must match values length")
            x0, x1 = cov[~mask1], cov[mask1]
        return Sample(values[~mask1], values[mask1], x0, x1, orientation)


def default_search_interval(sample):
    """Cutoff search range: pooled data extended by 3 pooled SDs."""
    pooled = sample.pooled()
    sd = float(np.std(pooled, ddof=1)) if pooled.size > 1 else 1.0
    sd = max(sd, 1e-12)
    return float(pooled.min() - 3 * sd), float(pooled.max() + 3 * sd)


# ---------------------------------------------------------------------------
# per-draw curve families (vectorized se/sp over retained draws)
# ---------------------------------------------------------------------------

def _col(a):
    return np.asarray(a, dtype=float).reshape(-1, 1)


def _as_draw_grid(c):
    """Accept c as (m,) shared grid or (draws, 1) per-draw points."""
    cc = np.asarray(c, dtype=float)
    return cc[None, :] if cc.ndim == 1 else cc


class NormalPairDraws:
    """Per-draw binormal pairs (mu0, sigma0, mu1, sigma1)."""

    def __init__(self, mu0, sigma0, mu1, sigma1):
        self.mu0, self.sigma0 = _col(mu0), _col(sigma0)
        self.mu1, self.sigma1 = _col(mu1), _col(sigma1)
        self.n_draws = self.mu0.shape[0]

    def __getitem__(self, sl):
        return NormalPairDraws(self.mu0[sl], self.sigma0[sl], self.mu1[sl], self.sigma1[sl])

    def se_sp(self, c):
        cc = _as_draw_grid(c)
        sp = special.ndtr((cc - self.mu0) / self.sigma0)
        se = 1.0 - special.ndtr((cc - self.mu1) / self.sigma1)
        return se, sp

    def auc(self):
        a = (self.mu1 - self.mu0) / self.sigma1
        b = self.sigma0 / self.sigma1
        return special.ndtr(a / np.hypot(1.0, b)).ravel()

    def pair_at(self, i):
        return RocPair.general(
            NormalDist(self.mu0[i, 0], self.sigma0[i, 0]),
            NormalDist(self.mu1[i, 0], self.sigma1[i, 0]),
        )


class PvNormalDraws:
    """Per-draw parametric placement-value pairs (F0 normal, probit-PV normal)."""

    def __init__(self, mu0, sigma0, mu, sigma):
        self.mu0, self.sigma0 = _col(mu0), _col(sigma0)
        self.mu, self.sigma = _col(mu), _col(sigma)
        self.n_draws = self.mu0.shape[0]

    def __getitem__(self, sl):
        return PvNormalDraws(self.mu0[sl], self.sigma0[sl], self.mu[sl], self.sigma[sl])

    def se_sp(self, c):
        cc = _as_draw_grid(c)
        sp = special.ndtr((cc - self.mu0) / self.sigma0)
        u = special.ndtri(np.clip(1.0 - sp, PV_CLAMP, 1.0 - PV_CLAMP))
        se = special.ndtr((u - self.mu) / self.sigma)
        return se, sp

    def auc(self):
        return special.ndtr(-self.mu / np.hypot(self.sigma, 1.0)).ravel()

    def pair_at(self, i):
        return RocPair.placement(
            NormalDist(self.mu0[i, 0], self.sigma0[i, 0]),
            ProbitNormalDist(self.mu[i, 0], self.sigma[i, 0]),
        )


class PvMixtureDraws:
    """Per-draw semiparametric pairs: mixture F0 and probit-mixture PV."""

    def __init__(self, w0, m0, s0, w, m, s):
        self.w0, self.m0, self.s0 = np.asarray(w0, float), np.asarray(m0, float), _col(s0)
        self.w, self.m, self.s = np.asarray(w, float), np.asarray(m, float), _col(s)
        self.n_draws = self.w0.shape[0]
        self._auc_cache = None

    def __getitem__(self, sl):
        return PvMixtureDraws(self.w0[sl], self.m0[sl], self.s0[sl], self.w[sl], self.m[sl], self.s[sl])

    @staticmethod
    def _mix_cdf(x, w, m, s):
        # x: (d, g); accumulate one component at a time to keep the working
        # set at (d, g) rather than (d, K, g)
        out = np.zeros(np.broadcast_shapes(x.shape, (w.shape[0], 1)))
        for k in range(w.shape[1]):
            out += w[:, k : k + 1] * special.ndtr((x - m[:, k : k + 1]) / s)
        return out

    def se_sp(self, c):
        cc = _as_draw_grid(c)
        sp = self._mix_cdf(cc, self.w0, self.m0, self.s0)
        u = special.ndtri(np.clip(1.0 - sp, PV_CLAMP, 1.0 - PV_CLAMP))
        se = self._mix_cdf(u, self.w, self.m, self.s)
        return se, sp

    def auc(self):
        # int_0^1 sum_k w_k Phi((ndtri(t)-m_k)/s) dt = sum_k w_k Phi(-m_k/sqrt(1+s^2))
        if self._auc_cache is None:
            comp = special.ndtr(-self.m / np.hypot(self.s, 1.0))
            self._auc_cache = np.einsum("dk,dk->d", self.w, comp)
        return self._auc_cache

    def pair_at(self, i):
        return RocPair.placement(
            NormalMixture(self.w0[i], self.m0[i], self.s0[i, 0]),
            ProbitNormalMixture(self.w[i], self.m[i], self.s[i, 0]),
        )


# ---------------------------------------------------------------------------
# estimator base
# ---------------------------------------------------------------------------

class BaseRocEstimator(BaseEstimator):
    """Common fit surface: fit(values, labels, covariate=None) or fit_sample."""

    _min_per_group = 3
    _supports_covariate = False

    def fit(self, values, labels, covariate=None):
        return self.fit_sample(Sample.from_arrays(values, labels, covariate))

    def fit_sample(self, sample):
        norm_sample, flipped = sample.normalized()
        if norm_sample.has_covariate and not self._supports_covariate:
            raise UnsupportedModelError(
                f"{type(self).__name__} cannot accommodate covariates"
            )
        check_min_size(norm_sample.y0, self._min_per_group, "healthy group")
        check_min_size(norm_sample.y1, self._min_per_group, "diseased group")
        self._fit(norm_sample)
        self.sample_ = norm_sample
        self.flipped_ = flipped
        return self

    def _fit(self, sample):
        raise NotImplementedError

    def _check_fitted(self):
        if not hasattr(self, "sample_"):
            raise InvalidArgumentError(f"{type(self).__name__} is not fitted")

    @property
    def is_bayesian(self):
        return False

    @property
    def has_covariate_fit(self):
        self._check_fitted()
        return self.sample_.has_covariate

    def _check_at_x(self, at_x):
        if at_x is None and self.has_covariate_fit:
            raise UnsupportedQueryError("model was fitted with a covariate; pass at_x")
        if at_x is not None and not self.has_covariate_fit:
            raise UnsupportedQueryError("model has no covariate; at_x is not supported")

    def roc_pair(self, at_x=None):
        raise NotImplementedError

    def auc(self, at_x=None):
        raise NotImplementedError


class EmpiricalRoc(BaseRocEstimator):
    """Empirical CDF model; AUC by the tie-corrected Mann-Whitney sum."""

    def _fit(self, sample):
        self._pair = RocPair.general(EmpiricalCdf(sample.y0), EmpiricalCdf(sample.y1))

    def roc_pair(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self._pair

    def auc(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return delong_auc(self.sample_.y0, self.sample_.y1)


class KernelRoc(BaseRocEstimator):
    """Gaussian-kernel smoothed CDFs with rule-of-thumb bandwidths."""

    def _fit(self, sample):
        for name, values in (("healthy", sample.y0), ("diseased", sample.y1)):
            if np.min(values) == np.max(values):
                raise DegenerateSampleError(f"{name} group has no spread")
        self._pair = RocPair.general(KernelCdf(sample.y0), KernelCdf(sample.y1))

    def roc_pair(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self._pair

    def auc(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self._pair.auc()


class BigammaRoc(BaseRocEstimator):
    """Maximum-likelihood bigamma model with a shared shape parameter."""

    def _fit(self, sample):
        y0, y1 = sample.y0, sample.y1
        if np.min(y0) <= 0 or np.min(y1) <= 0:
            raise DomainViolationError("bigamma requires strictly positive biomarker values")
        n0, n1 = y0.size, y1.size
        s_log = float(np.log(y0).sum() + np.log(y1).sum())
        m0, m1 = float(y0.mean()), float(y1.mean())

        def neg_profile(log_k):
            k = math.exp(log_k)
            # scales at their conditional MLE theta_j = mean_j / k
            ll = (
                (k - 1) * s_log
                - k * (n0 * math.log(m0 / k) + n1 * math.log(m1 / k))
                - (n0 + n1) * (special.gammaln(k) + k)
            )
            return -ll

        res = sp_optimize.minimize_scalar(neg_profile, bounds=(-7.0, 7.0), method="bounded")
        k = float(math.exp(res.x))
        self.shape_ = k
        self.scale0_ = m0 / k
        self.scale1_ = m1 / k
        self._pair = RocPair.general(GammaDist(k, self.scale0_), GammaDist(k, self.scale1_))

    @classmethod
    def from_params(cls, shape, scale0, scale1):
        """Evaluation-only construction from known parameters."""
        est = cls()
        est.shape_ = float(shape)
        est.scale0_ = float(scale0)
        est.scale1_ = float(scale1)
        est._pair = RocPair.general(GammaDist(shape, scale0), GammaDist(shape, scale1))
        est.sample_ = Sample(
            np.asarray([scale0 * shape] * 3), np.asarray([scale1 * shape] * 3)
        )
        est.flipped_ = False
        return est

    def roc_pair(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self._pair

    def auc(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self._pair.auc()


# ---------------------------------------------------------------------------
# Bayesian estimators
# ---------------------------------------------------------------------------

class _BayesianRocMixin:
    """Shared posterior bookkeeping for the MCMC-backed estimators."""

    @property
    def is_bayesian(self):
        return True

    def mcmc_config(self):
        return McmcConfig(
            chains=self.chains,
            iterations=self.iterations,
            burn_in=self.burn_in,
            thin=self.thin,
            seed=self.seed,
        )

    def _finalize(self, chains_map):
        self.chains_ = chains_map
        self._family_cache = {}
        fam = self.draw_family(at_x=0.0 if self.sample_tmp_.has_covariate else None)
        auc_draws = fam.auc()
        cfg = self.mcmc_config()
        per_chain = cfg.per_chain
        self.rhat_auc_ = bayes.gelman_rubin(auc_draws.reshape(cfg.chains, per_chain)) if cfg.chains > 1 else float("nan")
        self.converged_ = not (np.isfinite(self.rhat_auc_) and self.rhat_auc_ > 1.2)
        if not self.converged_:
            warnings.warn(
                f"{type(self).__name__}: R-hat on the AUC trace is {self.rhat_auc_:.3f} (> 1.2); "
                "treat posterior summaries with caution",
                RuntimeWarning,
            )

    def draw_family(self, at_x=None):
        """Vectorized per-draw curve family, cached per covariate level."""
        self._check_fitted()
        self._check_at_x(at_x)
        key = None if at_x is None else float(at_x)
        cache = getattr(self, "_family_cache", None)
        if cache is None:
            cache = self._family_cache = {}
        if key not in cache:
            cache[key] = self._build_draw_family(at_x)
        return cache[key]

    def _build_draw_family(self, at_x):
        raise NotImplementedError

    def auc_draws(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        return self.draw_family(at_x=at_x).auc()

    def auc_summary(self, at_x=None):
        return bayes.summarize(self.auc_draws(at_x=at_x))

    def auc(self, at_x=None):
        return float(np.mean(self.auc_draws(at_x=at_x)))

    def dump_draws(self, path):
        """All retained draws, one row each, stage/group-prefixed columns."""
        self._check_fitted()
        header, blocks = [], []
        for tag, chains in self.chains_.items():
            h, rows = chains.to_rows()
            header.extend(f"{tag}_{name}" for name in h)
            blocks.append(rows)
        rows = np.hstack(blocks)
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows.tolist())


class BinormalRoc(_BayesianRocMixin, BaseRocEstimator):
    """Bayesian binormal model: conjugate Gibbs per group; with a covariate,
    a Bayesian simple linear regression per group."""

    _supports_covariate = True

    def __init__(self, chains=2, iterations=6000, burn_in=1000, thin=None, seed=0):
        self.chains = chains
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        self.seed = seed

    def _fit(self, sample):
        cfg = self.mcmc_config()
        self.sample_tmp_ = sample
        if sample.has_covariate:
            g0 = bayes.gibbs_normal_regression(sample.y0, sample.x0, cfg, stream_base=0)
            g1 = bayes.gibbs_normal_regression(sample.y1, sample.x1, cfg, stream_base=100)
        else:
            if np.min(sample.y0) == np.max(sample.y0) or np.min(sample.y1) == np.max(sample.y1):
                raise DegenerateSampleError("a group has zero variance")
            g0 = bayes.gibbs_normal_regression(sample.y0, None, cfg, stream_base=0)
            g1 = bayes.gibbs_normal_regression(sample.y1, None, cfg, stream_base=100)
        self.sample_ = sample  # needed before draw_family in _finalize
        self.flipped_ = False
        self._finalize({"g0": g0, "g1": g1})
        del self.sample_tmp_

    @classmethod
    def from_parameter_draws(cls, mu0=None, sigma0=None, mu1=None, sigma1=None,
                             b00=None, b10=None, b01=None, b11=None):
        """Build a fitted model directly from parameter draws (no sampling)."""
        est = cls()
        covariate = b00 is not None
        if covariate:
            b00, b10 = np.atleast_1d(b00).astype(float), np.atleast_1d(b10).astype(float)
            b01, b11 = np.atleast_1d(b01).astype(float), np.atleast_1d(b11).astype(float)
            s0, s1 = np.atleast_1d(sigma0).astype(float), np.atleast_1d(sigma1).astype(float)
            d = max(map(len, (b00, b10, b01, b11, s0, s1)))
            params0 = {
                "intercept": np.broadcast_to(b00, (1, d)).copy(),
                "slope": np.broadcast_to(b10, (1, d)).copy(),
                "variance": np.broadcast_to(s0**2, (1, d)).copy(),
            }
            params1 = {
                "intercept": np.broadcast_to(b01, (1, d)).copy(),
                "slope": np.broadcast_to(b11, (1, d)).copy(),
                "variance": np.broadcast_to(s1**2, (1, d)).copy(),
            }
            est.sample_ = Sample(np.zeros(3), np.ones(3), np.zeros(3), np.zeros(3))
        else:
            mu0, s0 = np.atleast_1d(mu0).astype(float), np.atleast_1d(sigma0).astype(float)
            mu1, s1 = np.atleast_1d(mu1).astype(float), np.atleast_1d(sigma1).astype(float)
            d = max(map(len, (mu0, s0, mu1, s1)))
            params0 = {
                "intercept": np.broadcast_to(mu0, (1, d)).copy(),
                "variance": np.broadcast_to(s0**2, (1, d)).copy(),
            }
            params1 = {
                "intercept": np.broadcast_to(mu1, (1, d)).copy(),
                "variance": np.broadcast_to(s1**2, (1, d)).copy(),
            }
            est.sample_ = Sample(np.zeros(3), np.ones(3))
        est.chains_ = {"g0": Chains(params0), "g1": Chains(params1)}
        est.flipped_ = False
        est.rhat_auc_ = float("nan")
        est.converged_ = True
        return est

    def _group_params(self, tag, at_x):
        ch = self.chains_[tag]
        sigma = np.sqrt(ch.stacked("variance"))
        if "slope" in ch.names:
            mu = ch.stacked("intercept") + ch.stacked("slope") * float(at_x)
        else:
            mu = ch.stacked("intercept")
        return mu, sigma

    def _build_draw_family(self, at_x):
        mu0, s0 = self._group_params("g0", at_x)
        mu1, s1 = self._group_params("g1", at_x)
        return NormalPairDraws(mu0, s0, mu1, s1)

    def roc_pair(self, at_x=None):
        """Point-summary pair from posterior-mean parameters."""
        self._check_fitted()
        self._check_at_x(at_x)
        mu0, s0 = self._group_params("g0", at_x if at_x is not None else 0.0)
        mu1, s1 = self._group_params("g1", at_x if at_x is not None else 0.0)
        return RocPair.general(
            NormalDist(mu0.mean(), s0.mean()), NormalDist(mu1.mean(), s1.mean())
        )


class _PvParametricState:
    """Tandem sampler: conjugate F0 stage plus probit placement-value stage.

    The placement values are recomputed from the current F0 draw every
    iteration, so F0 uncertainty propagates into the PV stage (no feedback
    in the other direction).
    """

    def __init__(self, y0, x0, y1, x1):
        self.stage0 = NormalRegressionState(y0, x0)
        self.y1 = y1
        self.x1 = x1
        self.stage2 = None

    def _placement_probit(self):
        mean = self.stage0.b0 + (self.stage0.b1 * self.x1 if self.x1 is not None else 0.0)
        z = 1.0 - special.ndtr((self.y1 - mean) / math.sqrt(self.stage0.sigma2))
        z = np.clip(z, PV_CLAMP, 1.0 - PV_CLAMP)
        return special.ndtri(z)

    def step(self, rng):
        self.stage0.step(rng)
        u = self._placement_probit()
        if self.stage2 is None:
            self.stage2 = NormalRegressionState(u, self.x1, allow_degenerate=True)
        else:
            self.stage2.set_response(u)
        self.stage2.step(rng)

    def snapshot(self):
        return self.stage0.snapshot() + self.stage2.snapshot()


class ParametricPvRoc(_BayesianRocMixin, BaseRocEstimator):
    """Parametric placement-value model: normal F0, probit-normal PV law."""

    _supports_covariate = True

    def __init__(self, chains=2, iterations=6000, burn_in=1000, thin=None, seed=0):
        self.chains = chains
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        self.seed = seed

    def _fit(self, sample):
        cfg = self.mcmc_config()
        self.sample_tmp_ = sample
        if not sample.has_covariate and (
            np.min(sample.y0) == np.max(sample.y0) or np.min(sample.y1) == np.max(sample.y1)
        ):
            raise DegenerateSampleError("a group has zero variance")
        x0, x1 = sample.x0, sample.x1
        if sample.has_covariate:
            shapes = {
                "b00": (), "b10": (), "variance0": (),
                "b0": (), "b1": (), "variance": (),
            }
        else:
            shapes = {"mu0": (), "variance0": (), "mu": (), "variance": ()}
        chains = run_chains(
            lambda rng: _PvParametricState(sample.y0, x0, sample.y1, x1),
            lambda s: s.snapshot(),
            cfg,
            stream_base=0,
            shapes=shapes,
        )
        self.sample_ = sample
        self.flipped_ = False
        self._finalize({"pv": chains})
        del self.sample_tmp_

    @classmethod
    def from_parameter_draws(cls, mu0=None, sigma0=None, mu=None, sigma=None,
                             b00=None, b10=None, b0=None, b1=None):
        est = cls()
        covariate = b00 is not None
        if covariate:
            arrs = [np.atleast_1d(v).astype(float) for v in (b00, b10, sigma0, b0, b1, sigma)]
            d = max(map(len, arrs))
            names = ["b00", "b10", "variance0", "b0", "b1", "variance"]
            vals = [arrs[0], arrs[1], arrs[2] ** 2, arrs[3], arrs[4], arrs[5] ** 2]
            est.sample_ = Sample(np.zeros(3), np.ones(3), np.zeros(3), np.zeros(3))
        else:
            arrs = [np.atleast_1d(v).astype(float) for v in (mu0, sigma0, mu, sigma)]
            d = max(map(len, arrs))
            names = ["mu0", "variance0", "mu", "variance"]
            vals = [arrs[0], arrs[1] ** 2, arrs[2], arrs[3] ** 2]
            est.sample_ = Sample(np.zeros(3), np.ones(3))
        est.chains_ = {"pv": Chains({n: np.broadcast_to(v, (1, d)).copy() for n, v in zip(names, vals)})}
        est.flipped_ = False
        est.rhat_auc_ = float("nan")
        est.converged_ = True
        return est

    def _params(self, at_x):
        ch = self.chains_["pv"]
        s0 = np.sqrt(ch.stacked("variance0"))
        s = np.sqrt(ch.stacked("variance"))
        if "b00" in ch.names:
            mu0 = ch.stacked("b00") + ch.stacked("b10") * float(at_x)
            mu = ch.stacked("b0") + ch.stacked("b1") * float(at_x)
        else:
            mu0 = ch.stacked("mu0")
            mu = ch.stacked("mu")
        return mu0, s0, mu, s

    def _build_draw_family(self, at_x):
        mu0, s0, mu, s = self._params(at_x if at_x is not None else 0.0)
        return PvNormalDraws(mu0, s0, mu, s)

    def roc_pair(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        mu0, s0, mu, s = self._params(at_x if at_x is not None else 0.0)
        return RocPair.placement(
            NormalDist(mu0.mean(), s0.mean()), ProbitNormalDist(mu.mean(), s.mean())
        )


class _PvDpmState:
    """Tandem sampler with truncated-DPM stages for F0 and the probit PVs."""

    def __init__(self, y0, x0, y1, x1, K, alpha):
        self.stage0 = DpmState(y0, K, alpha, x=x0)
        self.y1 = y1
        self.x1 = x1
        self.K = K
        self.alpha = alpha
        self.stage2 = None

    def _placement_probit(self):
        st = self.stage0
        if st.has_slope:
            means = st.mu[None, :] + np.outer(self.x1, st.slope)
        else:
            means = st.mu[None, :]
        zc = (self.y1[:, None] - means) / math.sqrt(st.sigma2)
        z = 1.0 - special.ndtr(zc) @ st.weights
        z = np.clip(z, PV_CLAMP, 1.0 - PV_CLAMP)
        return special.ndtri(z)

    def step(self, rng):
        self.stage0.step(rng)
        u = self._placement_probit()
        if self.stage2 is None:
            self.stage2 = DpmState(u, self.K, self.alpha, x=self.x1, sort=False)
        else:
            self.stage2.set_response(u)
        self.stage2.step(rng)

    def snapshot(self):
        return self.stage0.snapshot() + self.stage2.snapshot()


class SemiparametricPvRoc(_BayesianRocMixin, BaseRocEstimator):
    """Semiparametric placement-value model: truncated DPM stages.

    ``n_components=1`` degenerates to the parametric placement-value sampler
    (the DPM kernel requires K >= 2).
    """

    _supports_covariate = True
    _min_per_group = 10

    def __init__(self, chains=2, iterations=6000, burn_in=1000, thin=None, seed=0,
                 n_components=30, concentration=1.0):
        self.chains = chains
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        self.seed = seed
        self.n_components = n_components
        self.concentration = concentration

    def _fit(self, sample):
        cfg = self.mcmc_config()
        self.sample_tmp_ = sample
        K = int(self.n_components)
        # canonical ordering so retained draws ignore input permutation
        if sample.has_covariate:
            o1 = np.lexsort((sample.y1, sample.x1))
            y1, x1 = sample.y1[o1], sample.x1[o1]
            x0 = sample.x0
        else:
            y1, x1 = np.sort(sample.y1), None
            x0 = None
        if K == 1:
            state_factory = lambda rng: _PvParametricState(sample.y0, x0, y1, x1)
            if sample.has_covariate:
                shapes = {"b00": (), "b10": (), "variance0": (), "b0": (), "b1": (), "variance": ()}
            else:
                shapes = {"mu0": (), "variance0": (), "mu": (), "variance": ()}
        else:
            state_factory = lambda rng: _PvDpmState(
                sample.y0, x0, y1, x1, K, self.concentration
            )
            if sample.has_covariate:
                shapes = {
                    "weights0": (K,), "intercepts0": (K,), "slopes0": (K,), "variance0": (),
                    "weights": (K,), "intercepts": (K,), "slopes": (K,), "variance": (),
                }
            else:
                shapes = {
                    "weights0": (K,), "locations0": (K,), "variance0": (),
                    "weights": (K,), "locations": (K,), "variance": (),
                }
        chains = run_chains(state_factory, lambda s: s.snapshot(), cfg, stream_base=0, shapes=shapes)
        self._k_used = K
        self.sample_ = sample
        self.flipped_ = False
        self._finalize({"pv": chains})
        del self.sample_tmp_

    def _mixture_params(self, stage, at_x):
        ch = self.chains_["pv"]
        if self._k_used == 1:
            mu0, s0, mu, s = ParametricPvRoc._params(self, at_x if at_x is not None else 0.0)
            if stage == 0:
                return np.ones_like(mu0)[:, None], mu0[:, None], s0
            return np.ones_like(mu)[:, None], mu[:, None], s
        suffix = "0" if stage == 0 else ""
        w = ch.stacked("weights" + suffix)
        s = np.sqrt(ch.stacked("variance" + suffix))
        if ("intercepts" + suffix) in ch.names:
            m = ch.stacked("intercepts" + suffix) + ch.stacked("slopes" + suffix) * float(at_x)
        else:
            m = ch.stacked("locations" + suffix)
        return w, m, s

    def _build_draw_family(self, at_x):
        x = at_x if at_x is not None else 0.0
        w0, m0, s0 = self._mixture_params(0, x)
        w, m, s = self._mixture_params(1, x)
        if self._k_used == 1:
            return PvNormalDraws(m0.ravel(), s0, m.ravel(), s)
        return PvMixtureDraws(w0, m0, s0, w, m, s)

    def roc_pair(self, at_x=None):
        self._check_fitted()
        self._check_at_x(at_x)
        x = at_x if at_x is not None else 0.0
        w0, m0, s0 = self._mixture_params(0, x)
        w, m, s = self._mixture_params(1, x)
        w0m = w0.mean(axis=0)
        wm = w.mean(axis=0)
        return RocPair.placement(
            NormalMixture(w0m / w0m.sum(), m0.mean(axis=0), float(s0.mean())),
            ProbitNormalMixture(wm / wm.sum(), m.mean(axis=0), float(s.mean())),
        )

    def posterior_mean_cdf(self, x, stage=0, at_x=None):
        """Posterior mean of the stage CDF (average of per-draw mixture CDFs)."""
        self._check_fitted()
        xx = at_x if at_x is not None else 0.0
        w, m, s = self._mixture_params(stage, xx)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        chunk = 512
        for i in range(0, w.shape[0], chunk):
            z = (x[None, None, :] - m[i : i + chunk, :, None]) / s[i : i + chunk, :, None]
            out += np.einsum("dk,dkm->m", w[i : i + chunk], special.ndtr(z))
        return out / w.shape[0]


# ---------------------------------------------------------------------------
# bichi-squared transform of binormal parameters (evaluation only)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BichisqParams:
    """Reparameterized proper-ROC parameters lambda = 1/b^2, theta = (ab/(1-b^2))^2."""

    lam: float
    theta: float

    @staticmethod
    def from_binormal(a, b):
        if abs(b - 1.0) <= 1e-6:
            raise NumericFailureError(
                "bichi-squared transform is singular at b = 1; use the binormal curve"
            )
        if b <= 0:
            raise InvalidArgumentError("b must be positive")
        return BichisqParams(lam=1.0 / (b * b), theta=(a * b / (1.0 - b * b)) ** 2)


def _ncx2_quantile(p, df, ncp):
    """Inverse noncentral chi-squared CDF by vectorized bisection."""
    p = np.asarray(p, dtype=float)
    hi = df + ncp + 40.0 * math.sqrt(2.0 * (df + 2.0 * ncp)) + 100.0
    while noncentral_chisq_cdf(hi, df, ncp) < np.max(p):
        hi *= 2.0
    return invert_cdf(lambda x: noncentral_chisq_cdf(x, df, ncp), p, bracket=(0.0, hi), tol=1e-12)


def bichisq_roc(params, t):
    """Proper ROC curve of the bichi-squared model at false-positive rate t."""
    lam, th = params.lam, params.theta
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    inner = (t_arr > 0) & (t_arr < 1)
    out = np.where(t_arr >= 1, 1.0, 0.0)
    ti = t_arr[inner]
    if ti.size:
        if lam > 1:
            q = _ncx2_quantile(1.0 - ti, 1.0, th)
            vals = 1.0 - noncentral_chisq_cdf(q / lam, 1.0, lam * th)
        else:
            q = _ncx2_quantile(ti, 1.0, th)
            vals = noncentral_chisq_cdf(q / lam, 1.0, lam * th)
        out[inner] = np.clip(vals, 0.0, 1.0)
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def bichisq_auc(params):
    """Closed-form AUC: Phi(arg) + 2 * BVN(-arg, 0; -2 sqrt(lam)/(lam+1)).

    ``arg`` equals a / sqrt(1 + b^2) of the source binormal parameters,
    which in (lambda, theta) terms is sqrt(theta) |lambda - 1| / sqrt(lambda + 1).
    """
    lam, th = params.lam, params.theta
    arg = math.sqrt(th) * abs(lam - 1.0) / math.sqrt(lam + 1.0)
    rho = -2.0 * math.sqrt(lam) / (lam + 1.0)
    return float(np.clip(special.ndtr(arg) + 2.0 * bvn_cdf(-arg, 0.0, rho), 0.0, 1.0))


# ---------------------------------------------------------------------------
# covariate-specific queries (module-level operations)
# ---------------------------------------------------------------------------

def roc_at_x(model, x):
    """Covariate-specific point-summary RocPair of a fitted Bayesian model."""
    if not model.has_covariate_fit:
        raise UnsupportedQueryError("model was fitted without covariates")
    return model.roc_pair(at_x=float(x))


def auc_at_x(model, x):
    """Posterior summary (mean, sd, 95% interval) of the covariate-specific AUC."""
    if not model.has_covariate_fit:
        raise UnsupportedQueryError("model was fitted without covariates")
    return model.auc_summary(at_x=float(x))


MODEL_REGISTRY = {
    "emp": EmpiricalRoc,
    "nonpar": KernelRoc,
    "bn": BinormalRoc,
    "bigamma": BigammaRoc,
    "pv": ParametricPvRoc,
    "semipv": SemiparametricPvRoc,
}
