"""Gibbs samplers, chain management, convergence diagnostics, summaries.

Priors throughout: every mean/regression coefficient is N(0, 100) and every
variance is inverse-gamma IG(0.01, 0.01). Thinning defaults are chosen so a
default configuration retains 5000 draws in total across chains.
"""

from __future__ import annotations

import csv
import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .distributions import rng_stream
from .exceptions import DegenerateSampleError, InvalidArgumentError
from .validation import as_1d_float, check_min_size

__all__ = [
    "McmcConfig",
    "Chains",
    "gibbs_normal_regression",
    "gibbs_dpm_location",
    "gibbs_dpm_regression",
    "gelman_rubin",
    "summarize",
    "Summary",
]

PRIOR_PRECISION = 0.01  # N(0, 100) prior on each coefficient
IG_A = 0.01
IG_B = 0.01

RETAINED_TARGET = 5000


@dataclass(frozen=True)
class McmcConfig:
    """Chain layout. Defaults retain 2 * (6000-1000)/2 = 5000 draws."""

    chains: int = 2
    iterations: int = 6000
    burn_in: int = 1000
    thin: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.chains < 1:
            raise InvalidArgumentError("chains must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise InvalidArgumentError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.thin is not None and self.thin < 1:
            raise InvalidArgumentError("thin must be >= 1")

    @property
    def resolved_thin(self):
        if self.thin is not None:
            return self.thin
        kept = self.chains * (self.iterations - self.burn_in)
        return max(1, round(kept / RETAINED_TARGET))

    @property
    def per_chain(self):
        return (self.iterations - self.burn_in) // self.resolved_thin

    @property
    def n_retained(self):
        return self.chains * self.per_chain


class Chains:
    """Retained draws, kept per chain: each parameter is (chains, kept, ...)."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.params = params

    def __getitem__(self, name):
        return self.params[name]

    @property
    def names(self):
        return list(self.params)

    @property
    def n_chains(self):
        return next(iter(self.params.values())).shape[0]

    @property
    def n_retained(self):
        a = next(iter(self.params.values()))
        return a.shape[0] * a.shape[1]

    def stacked(self, name):
        """All chains concatenated: (chains * kept, ...)."""
        a = self.params[name]
        return a.reshape(-1, *a.shape[2:])

    def to_rows(self):
        """Flatten to one row per retained draw; returns (header, 2-D array)."""
        header, cols = [], []
        for name in self.names:
            a = self.stacked(name)
            if a.ndim == 1:
                header.append(name)
                cols.append(a[:, None])
            else:
                flat = a.reshape(a.shape[0], -1)
                header.extend(f"{name}_{i + 1}" for i in range(flat.shape[1]))
                cols.append(flat)
        return header, np.hstack(cols)

    def dump_csv(self, path):
        """One row per retained draw, columns = parameters."""
        header, rows = self.to_rows()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows.tolist())


# ---------------------------------------------------------------------------
# conjugate normal / regression kernel
# ---------------------------------------------------------------------------

class NormalRegressionState:
    """One-step Gibbs updates for y = b0 (+ b1 x) + eps, eps ~ N(0, sigma^2).

    Scalar arithmetic throughout: these updates run tens of thousands of
    times inside simulation loops.
    """

    def __init__(self, y, x=None, allow_degenerate=False):
        y = as_1d_float(y, "y")
        self.n = y.size
        self.has_slope = x is not None
        self._allow_degenerate = allow_degenerate
        self.sy = float(y.sum())
        self.syy = float(y @ y)
        if self.has_slope:
            x = as_1d_float(x, "x")
            if x.size != self.n:
                raise InvalidArgumentError("x and y must have equal length")
            self._x = x
            self.sx = float(x.sum())
            self.sxx = float(x @ x)
            self.sxy = float(x @ y)
            det = self.n * self.sxx - self.sx * self.sx
            if det <= 1e-12 * max(1.0, self.n * self.sxx):
                raise DegenerateSampleError("covariate has no variation")
            self.b1 = (self.n * self.sxy - self.sx * self.sy) / det
            self.b0 = (self.sy - self.b1 * self.sx) / self.n
        else:
            self.b0 = self.sy / self.n
            self.b1 = 0.0
        ssr = self._ssr(self.b0, self.b1)
        degenerate = ssr <= 1e-12 * self.n * max(1.0, self.b0**2)
        if not self.has_slope and self.n >= 2 and degenerate and not allow_degenerate:
            raise DegenerateSampleError("response has no variation")
        self.sigma2 = max(ssr / max(self.n - (2 if self.has_slope else 1), 1), 1e-8)

    def set_response(self, y):
        """Swap in new response values of the same length (tandem samplers)."""
        self.sy = float(y.sum())
        self.syy = float(y @ y)
        if self.has_slope:
            self.sxy = float(self._x @ y)

    def _ssr(self, b0, b1):
        if self.has_slope:
            return (
                self.syy
                - 2 * b0 * self.sy
                - 2 * b1 * self.sxy
                + self.n * b0 * b0
                + 2 * b0 * b1 * self.sx
                + b1 * b1 * self.sxx
            )
        return self.syy - 2 * b0 * self.sy + self.n * b0 * b0

    def step(self, rng):
        """One systematic scan: coefficients block, then the variance."""
        inv_s2 = 1.0 / self.sigma2
        if self.has_slope:
            a11 = self.n * inv_s2 + PRIOR_PRECISION
            a12 = self.sx * inv_s2
            a22 = self.sxx * inv_s2 + PRIOR_PRECISION
            det = a11 * a22 - a12 * a12
            m0 = (a22 * self.sy - a12 * self.sxy) * inv_s2 / det
            m1 = (a11 * self.sxy - a12 * self.sy) * inv_s2 / det
            # Cholesky of the 2x2 covariance A^{-1}
            v11 = a22 / det
            v12 = -a12 / det
            v22 = a11 / det
            l11 = math.sqrt(v11)
            l21 = v12 / l11
            l22 = math.sqrt(max(v22 - l21 * l21, 1e-300))
            z1 = rng.standard_normal()
            z2 = rng.standard_normal()
            self.b0 = m0 + l11 * z1
            self.b1 = m1 + l21 * z1 + l22 * z2
        else:
            prec = self.n * inv_s2 + PRIOR_PRECISION
            mean = self.sy * inv_s2 / prec
            self.b0 = mean + rng.standard_normal() / math.sqrt(prec)
        ssr = max(self._ssr(self.b0, self.b1), 0.0)
        self.sigma2 = 1.0 / rng.gamma(IG_A + 0.5 * self.n, 1.0 / (IG_B + 0.5 * ssr))

    def snapshot(self):
        if self.has_slope:
            return self.b0, self.b1, self.sigma2
        return self.b0, self.sigma2


def run_chains(make_state, record, cfg, stream_base, shapes):
    """Generic multi-chain driver.

    ``make_state`` builds fresh sampler state; ``record(state) -> tuple`` maps
    it to per-parameter values matching ``shapes`` (name -> trailing shape).
    """
    thin = cfg.resolved_thin
    per_chain = cfg.per_chain
    if per_chain < 1:
        raise InvalidArgumentError("no draws retained; decrease thin or burn_in")
    params = {
        name: np.empty((cfg.chains, per_chain) + tuple(shape), dtype=float)
        for name, shape in shapes.items()
    }
    names = list(shapes)
    for chain in range(cfg.chains):
        rng = rng_stream(cfg.seed, stream_base + chain)
        state = make_state(rng)
        kept = 0
        for it in range(cfg.iterations):
            state.step(rng)
            if it >= cfg.burn_in and (it - cfg.burn_in) % thin == 0 and kept < per_chain:
                values = record(state)
                for name, value in zip(names, values):
                    params[name][chain, kept] = value
                kept += 1
    return Chains(params)


def gibbs_normal_regression(y, x=None, cfg=McmcConfig(), stream_base=0):
    """Conjugate Gibbs for a normal mean or simple linear regression.

    Returns chains over ``intercept``, optionally ``slope``, and ``variance``.
    Deterministic given (cfg.seed, stream_base, chain index).
    """
    y = check_min_size(as_1d_float(y, "y"), 1, "y")
    if x is None:
        shapes = {"intercept": (), "variance": ()}
        record = lambda s: (s.b0, s.sigma2)
    else:
        shapes = {"intercept": (), "slope": (), "variance": ()}
        record = lambda s: (s.b0, s.b1, s.sigma2)
    return run_chains(lambda rng: NormalRegressionState(y, x), record, cfg, stream_base, shapes)


# ---------------------------------------------------------------------------
# truncated Dirichlet-process mixture kernel (blocked Gibbs)
# ---------------------------------------------------------------------------

class DpmState:
    """Blocked Gibbs state for a truncated location-DPM of normals.

    Shared scale across components; stick-breaking weights with V_K = 1.
    With a covariate, each component carries its own (intercept, slope).
    Data are sorted on entry so retained draws are invariant to the input
    ordering of exchangeable observations.
    """

    def __init__(self, y, K, alpha, x=None, sort=True):
        y = as_1d_float(y, "y")
        if K < 2:
            raise InvalidArgumentError("DPM truncation needs K >= 2; use the normal kernel for K = 1")
        self.K = int(K)
        self.alpha = float(alpha)
        if self.alpha <= 0:
            raise InvalidArgumentError("alpha must be positive")
        self.has_slope = x is not None
        if x is not None:
            x = as_1d_float(x, "x")
            if x.size != y.size:
                raise InvalidArgumentError("x and y must have equal length")
        if sort:
            order = np.lexsort((y, x)) if x is not None else np.argsort(y, kind="stable")
            y = y[order]
            x = x[order] if x is not None else None
        self.x = x
        self.y = y
        self.n = self.y.size
        # quantile-bin initialization
        bins = np.clip((np.arange(self.n) * self.K) // max(self.n, 1), 0, self.K - 1)
        self.assign = bins.astype(int)
        self.mu = np.zeros(self.K)
        self.slope = np.zeros(self.K)
        counts = np.bincount(self.assign, minlength=self.K)
        sums = np.bincount(self.assign, weights=self.y, minlength=self.K)
        occupied = counts > 0
        self.mu[occupied] = sums[occupied] / counts[occupied]
        resid = self.y - self.mu[self.assign]
        self.sigma2 = max(float(resid @ resid) / max(self.n - 1, 1), 1e-6)
        self.weights = np.full(self.K, 1.0 / self.K)

    def set_response(self, y):
        """Swap in new response values of the same length (tandem samplers)."""
        self.y = np.asarray(y, dtype=float)

    def _component_means(self):
        if self.has_slope:
            return self.mu[None, :] + np.outer(self.x, self.slope)
        return np.broadcast_to(self.mu, (self.n, self.K))

    def step(self, rng):
        means = self._component_means()
        log_w = np.log(np.maximum(self.weights, 1e-300))
        z = (self.y[:, None] - means) / math.sqrt(self.sigma2)
        logp = log_w - 0.5 * z * z
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        p /= p.sum(axis=1, keepdims=True)
        u = rng.random(self.n)
        self.assign = (p.cumsum(axis=1) > u[:, None]).argmax(axis=1)

        counts = np.bincount(self.assign, minlength=self.K)
        tail = counts[::-1].cumsum()[::-1] - counts  # n_{l > k}
        v = np.empty(self.K)
        v[:-1] = rng.beta(1.0 + counts[:-1], self.alpha + tail[:-1])
        v[-1] = 1.0
        stick = np.cumprod(np.concatenate([[1.0], 1.0 - v[:-1]]))
        self.weights = v * stick

        inv_s2 = 1.0 / self.sigma2
        if self.has_slope:
            sx = np.bincount(self.assign, weights=self.x, minlength=self.K)
            sxx = np.bincount(self.assign, weights=self.x * self.x, minlength=self.K)
            sy = np.bincount(self.assign, weights=self.y, minlength=self.K)
            sxy = np.bincount(self.assign, weights=self.x * self.y, minlength=self.K)
            a11 = counts * inv_s2 + PRIOR_PRECISION
            a12 = sx * inv_s2
            a22 = sxx * inv_s2 + PRIOR_PRECISION
            det = a11 * a22 - a12 * a12
            m0 = (a22 * sy - a12 * sxy) * inv_s2 / det
            m1 = (a11 * sxy - a12 * sy) * inv_s2 / det
            v11 = a22 / det
            v12 = -a12 / det
            v22 = a11 / det
            l11 = np.sqrt(v11)
            l21 = v12 / l11
            l22 = np.sqrt(np.maximum(v22 - l21 * l21, 1e-300))
            z1 = rng.standard_normal(self.K)
            z2 = rng.standard_normal(self.K)
            self.mu = m0 + l11 * z1
            self.slope = m1 + l21 * z1 + l22 * z2
            resid = self.y - (self.mu[self.assign] + self.slope[self.assign] * self.x)
        else:
            sums = np.bincount(self.assign, weights=self.y, minlength=self.K)
            post_var = 1.0 / (counts * inv_s2 + PRIOR_PRECISION)
            post_mean = post_var * sums * inv_s2  # empty components reduce to the prior
            self.mu = post_mean + np.sqrt(post_var) * rng.standard_normal(self.K)
            resid = self.y - self.mu[self.assign]
        ssr = float(resid @ resid)
        self.sigma2 = 1.0 / rng.gamma(IG_A + 0.5 * self.n, 1.0 / (IG_B + 0.5 * ssr))

    def snapshot(self):
        if self.has_slope:
            return self.weights.copy(), self.mu.copy(), self.slope.copy(), self.sigma2
        return self.weights.copy(), self.mu.copy(), self.sigma2


def gibbs_dpm_location(y, K=30, alpha=1.0, cfg=McmcConfig(), stream_base=0):
    """Blocked Gibbs for a truncated location-DPM with shared scale.

    Returns chains over ``weights`` (K,), ``locations`` (K,), ``variance``.
    """
    y = check_min_size(as_1d_float(y, "y"), 10, "y")
    shapes = {"weights": (K,), "locations": (K,), "variance": ()}
    record = lambda s: s.snapshot()
    return run_chains(lambda rng: DpmState(y, K, alpha), record, cfg, stream_base, shapes)


def gibbs_dpm_regression(y, x, K=30, alpha=1.0, cfg=McmcConfig(), stream_base=0):
    """Covariate DPM: per-component intercept+slope, shared scale, free weights."""
    y = check_min_size(as_1d_float(y, "y"), 10, "y")
    shapes = {"weights": (K,), "intercepts": (K,), "slopes": (K,), "variance": ()}
    record = lambda s: s.snapshot()
    return run_chains(lambda rng: DpmState(y, K, alpha, x=x), record, cfg, stream_base, shapes)


# ---------------------------------------------------------------------------
# diagnostics and summaries
# ---------------------------------------------------------------------------

def gelman_rubin(chains, parameter=None):
    """Potential scale reduction factor sqrt(((n-1)/n * W + B/n) / W).

    ``chains`` is a Chains object (give ``parameter``) or a (chains, draws)
    array of a scalar parameter.
    """
    if isinstance(chains, Chains):
        if parameter is None:
            raise InvalidArgumentError("parameter name required with a Chains object")
        draws = chains[parameter]
    else:
        draws = np.asarray(chains, dtype=float)
    if draws.ndim != 2:
        raise InvalidArgumentError("expected a (chains, draws) array of a scalar parameter")
    m, n = draws.shape
    if m < 2:
        raise InvalidArgumentError("Gelman-Rubin needs at least 2 chains")
    if n < 10:
        raise InvalidArgumentError("Gelman-Rubin needs at least 10 retained draws per chain")
    w = draws.var(axis=1, ddof=1).mean()
    b_over_n = draws.mean(axis=1).var(ddof=1)
    return float(np.sqrt(((n - 1) / n * w + b_over_n) / w))


Summary = namedtuple("Summary", ["mean", "sd", "lo", "hi"])


def summarize(draws, functional=None):
    """Posterior mean, SD, and equal-tailed 95% interval of a functional."""
    values = np.asarray(draws, dtype=float).reshape(-1) if functional is None else None
    if functional is not None:
        values = np.asarray([functional(d) for d in draws], dtype=float)
    if values.size < 2:
        raise InvalidArgumentError("summaries need at least 2 retained draws")
    lo, hi = np.quantile(values, [0.025, 0.975])
    return Summary(float(values.mean()), float(values.std(ddof=1)), float(lo), float(hi))
