"""Probability distributions, special functions, and reproducible random streams.

Everything here is vectorized: ``cdf``/``quantile``/``pdf`` accept scalars or
arrays and broadcast. Distribution objects are immutable after construction
and safe to share across threads; generators returned by :func:`rng_stream`
are per-stream mutable state and must not be shared.
"""

from __future__ import annotations

import abc

import numpy as np
from scipy import special

from .exceptions import (
    BracketViolationError,
    DegenerateSampleError,
    InvalidArgumentError,
)
from .validation import as_1d_float, check_positive_scalar, check_probability

__all__ = [
    "normal_cdf",
    "normal_quantile",
    "gamma_cdf",
    "f_cdf",
    "noncentral_chisq_cdf",
    "bvn_cdf",
    "silverman_bandwidth",
    "invert_cdf",
    "rng_stream",
    "draw_normal",
    "draw_gamma",
    "draw_uniform",
    "Dist",
    "NormalDist",
    "GammaDist",
    "NormalMixture",
    "EmpiricalCdf",
    "KernelCdf",
    "LogNormalDist",
    "SquaredNormalDist",
    "ProbitNormalDist",
    "ProbitNormalMixture",
]


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def _check_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    return arr


def normal_cdf(x, mu=0.0, sigma=1.0):
    """Normal CDF evaluated at ``x``."""
    sigma = check_positive_scalar(sigma, "sigma")
    x = _check_finite(x)
    out = special.ndtr((x - mu) / sigma)
    return float(out) if np.ndim(out) == 0 else out


def normal_quantile(p, mu=0.0, sigma=1.0):
    """Inverse normal CDF; ``p`` must lie strictly inside (0, 1)."""
    sigma = check_positive_scalar(sigma, "sigma")
    p = check_probability(p)
    out = mu + sigma * special.ndtri(p)
    return float(out) if np.ndim(out) == 0 else out


def gamma_cdf(x, shape, scale):
    """Gamma CDF (shape/scale parameterization); negative ``x`` maps to 0."""
    shape = check_positive_scalar(shape, "shape")
    scale = check_positive_scalar(scale, "scale")
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, special.gammainc(shape, np.maximum(x, 0.0) / scale), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def f_cdf(x, d1, d2):
    """CDF of the F distribution via the regularized incomplete beta."""
    d1 = check_positive_scalar(d1, "d1")
    d2 = check_positive_scalar(d2, "d2")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = d1 * x / (d1 * x + d2)
    out = np.where(x > 0, special.betainc(d1 / 2, d2 / 2, np.clip(z, 0.0, 1.0)), 0.0)
    return float(out) if np.ndim(out) == 0 else out


_NCX2_TAIL = 1e-14


def noncentral_chisq_cdf(x, df, ncp):
    """Noncentral chi-squared CDF as a Poisson mixture of central CDFs.

    Terms are accumulated until the remaining Poisson mass falls below 1e-14,
    so the absolute error is bounded well under 1e-10.
    """
    df = check_positive_scalar(df, "df")
    ncp = float(ncp)
    if not np.isfinite(ncp) or ncp < 0:
        raise InvalidArgumentError(f"ncp must be nonnegative, got {ncp!r}")
    x = np.asarray(x, dtype=float)
    xc = np.maximum(x, 0.0)
    if ncp == 0.0:
        out = np.where(x > 0, special.chdtr(df, xc), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    lam = ncp / 2.0
    out = np.zeros_like(xc)
    log_w = -lam  # log Poisson weight at j = 0
    cum = 0.0
    j = 0
    while cum < 1.0 - _NCX2_TAIL:
        w = np.exp(log_w)
        out += w * special.chdtr(df + 2 * j, xc)
        cum += w
        j += 1
        log_w += np.log(lam) - np.log(j) if lam > 0 else -np.inf
        if j > 100000:  # unreachable for sane ncp; guards infinite loops
            break
    out = np.where(x > 0, out, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def bvn_cdf(h, k, rho):
    """Standard bivariate normal CDF ``P[X <= h, Y <= k]`` with correlation rho.

    Uses Owen's T identity, which is accurate to ~1e-15; correlations within
    1e-12 of +-1 fall back to the degenerate comonotone/antimonotone forms.
    """
    h = float(_check_finite(h, "h"))
    k = float(_check_finite(k, "k"))
    rho = float(rho)
    if not np.isfinite(rho) or abs(rho) >= 1.0:
        raise InvalidArgumentError(f"|rho| must be < 1, got {rho!r}")
    if rho >= 1.0 - 1e-12:
        return float(special.ndtr(min(h, k)))
    if rho <= -1.0 + 1e-12:
        return float(max(special.ndtr(h) + special.ndtr(k) - 1.0, 0.0))
    if rho == 0.0:
        return float(special.ndtr(h) * special.ndtr(k))
    s = np.sqrt(1.0 - rho * rho)
    if h == 0.0 and k == 0.0:
        return float(0.25 + np.arcsin(rho) / (2.0 * np.pi))
    if k == 0.0:
        return float(0.5 * special.ndtr(h) - special.owens_t(h, -rho / s))
    if h == 0.0:
        return float(0.5 * special.ndtr(k) - special.owens_t(k, -rho / s))
    a1 = (k - rho * h) / (h * s)
    a2 = (h - rho * k) / (k * s)
    delta = 0.0 if h * k > 0 else 0.5
    val = (
        0.5 * (special.ndtr(h) + special.ndtr(k))
        - special.owens_t(h, a1)
        - special.owens_t(k, a2)
        - delta
    )
    return float(min(max(val, 0.0), 1.0))


def silverman_bandwidth(values):
    """Rule-of-thumb kernel bandwidth 0.9 * min(SD, IQR/1.34) * n^(-1/5).

    SD uses the n-1 denominator; the IQR uses linear-interpolation quantiles.
    """
    v = as_1d_float(values)
    if v.size < 2:
        raise InvalidArgumentError("bandwidth needs at least 2 observations")
    if np.min(v) == np.max(v):
        raise DegenerateSampleError("all values identical; bandwidth would be 0")
    sd = float(np.std(v, ddof=1))
    q25, q75 = np.quantile(v, [0.25, 0.75])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * v.size ** (-0.2)


def invert_cdf(dist, p, bracket=None, tol=1e-9, max_iter=200):
    """Invert a nondecreasing CDF by bisection: returns x with |cdf(x) - p| <= tol.

    ``dist`` is either a :class:`Dist` or a plain callable. ``p`` may be an
    array; the bisection then runs vectorized over all targets.
    """
    cdf = dist.cdf if hasattr(dist, "cdf") else dist
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if bracket is None:
        bracket = dist._default_bracket()  # Dist instances only
    lo = np.full(p_arr.shape, float(bracket[0]))
    hi = np.full(p_arr.shape, float(bracket[1]))
    flo = np.asarray(cdf(lo), dtype=float)
    fhi = np.asarray(cdf(hi), dtype=float)
    if np.any(p_arr < flo - 1e-12) or np.any(p_arr > fhi + 1e-12):
        raise BracketViolationError(
            f"target probability outside bracket range [{flo.min():.6g}, {fhi.max():.6g}]"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(cdf(mid), dtype=float)
        go_right = fm < p_arr
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        if np.all(np.abs(fm - p_arr) <= tol) and np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(mid)) + 1e-300):
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if np.ndim(p) == 0 else out.reshape(np.shape(p))


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def rng_stream(seed, stream_id=0):
    """Counter-based splittable stream: same (seed, stream_id) -> same draws.

    Streams with distinct ids are statistically independent and reproducible
    across runs and thread schedules (Philox keyed by a spawn path).
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def draw_normal(gen, mu=0.0, sigma=1.0, size=None):
    return gen.normal(mu, sigma, size=size)


def draw_gamma(gen, shape, scale, size=None):
    return gen.gamma(shape, scale, size=size)


def draw_uniform(gen, low=0.0, high=1.0, size=None):
    return gen.uniform(low, high, size=size)


# ---------------------------------------------------------------------------
# distribution objects
# ---------------------------------------------------------------------------

class Dist(abc.ABC):
    """Continuous distribution interface: cdf, quantile, and optionally pdf."""

    @abc.abstractmethod
    def cdf(self, x):
        ...

    def quantile(self, p):
        p = check_probability(p)
        return invert_cdf(self, p, self._default_bracket())

    def pdf(self, x):
        raise NotImplementedError(f"{type(self).__name__} does not expose a density")

    def _default_bracket(self):
        """Finite bracket guaranteed to enclose all quantiles of interest."""
        lo, hi = self._rough_range()
        span = max(hi - lo, 1e-6)
        return lo - 10.0 * span, hi + 10.0 * span

    def _rough_range(self):
        raise NotImplementedError


class NormalDist(Dist):
    def __init__(self, mu, sigma):
        self.mu = float(mu)
        self.sigma = check_positive_scalar(sigma, "sigma")

    def __repr__(self):
        return f"NormalDist(mu={self.mu:.6g}, sigma={self.sigma:.6g})"

    def cdf(self, x):
        out = special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        p = check_probability(p)
        out = self.mu + self.sigma * special.ndtri(p)
        return float(out) if np.ndim(p) == 0 else out

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        out = np.exp(-0.5 * z * z) / (self.sigma * np.sqrt(2 * np.pi))
        return float(out) if np.ndim(x) == 0 else out

    def _rough_range(self):
        return self.mu - 8 * self.sigma, self.mu + 8 * self.sigma


class GammaDist(Dist):
    """Gamma distribution with shape k and scale theta (mean = k * theta)."""

    def __init__(self, shape, scale):
        self.shape = check_positive_scalar(shape, "shape")
        self.scale = check_positive_scalar(scale, "scale")

    def __repr__(self):
        return f"GammaDist(shape={self.shape:.6g}, scale={self.scale:.6g})"

    def cdf(self, x):
        return gamma_cdf(x, self.shape, self.scale)

    def quantile(self, p):
        p = check_probability(p)
        out = self.scale * special.gammaincinv(self.shape, p)
        return float(out) if np.ndim(p) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logpdf = (
                (self.shape - 1) * np.log(x)
                - x / self.scale
                - special.gammaln(self.shape)
                - self.shape * np.log(self.scale)
            )
        out = np.where(x > 0, np.exp(logpdf), 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _rough_range(self):
        return 0.0, float(self.quantile(1 - 1e-12))

    def _default_bracket(self):
        return 0.0, self._rough_range()[1] * 10 + 1.0


class NormalMixture(Dist):
    """Finite mixture of normals; scales may be per-component or shared."""

    def __init__(self, weights, locations, scales):
        w = as_1d_float(weights, "weights")
        if np.any(w < -1e-15):
            raise InvalidArgumentError("mixture weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError(f"mixture weights must sum to 1, got {w.sum()!r}")
        mu = as_1d_float(locations, "locations")
        sc = np.broadcast_to(np.asarray(scales, dtype=float), mu.shape).copy()
        if np.any(sc <= 0):
            raise InvalidArgumentError("mixture scales must be positive")
        if w.shape != mu.shape:
            raise InvalidArgumentError("weights and locations must have equal length")
        self.weights = np.clip(w, 0.0, None)
        self.locations = mu
        self.scales = sc

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.locations) / self.scales
        out = special.ndtr(z) @ self.weights
        return float(out) if np.ndim(x) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.locations) / self.scales
        dens = np.exp(-0.5 * z * z) / (self.scales * np.sqrt(2 * np.pi))
        out = dens @ self.weights
        return float(out) if np.ndim(x) == 0 else out

    def _rough_range(self):
        lo = float(np.min(self.locations - 8 * self.scales))
        hi = float(np.max(self.locations + 8 * self.scales))
        return lo, hi


class EmpiricalCdf(Dist):
    """Right-continuous step CDF of a sample: cdf(x) = #{v_i <= x} / n."""

    def __init__(self, values):
        v = as_1d_float(values)
        if v.size == 0:
            raise InvalidArgumentError("empirical CDF needs at least one observation")
        self.values = np.sort(v)

    @property
    def n(self):
        return self.values.size

    def cdf(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        """Left-continuous inverse: smallest order statistic v with cdf(v) >= p."""
        p = check_probability(p, open_interval=False)
        idx = np.clip(np.ceil(np.asarray(p) * self.n).astype(int) - 1, 0, self.n - 1)
        out = self.values[idx]
        return float(out) if np.ndim(p) == 0 else out

    def _rough_range(self):
        return float(self.values[0]), float(self.values[-1])


class KernelCdf(Dist):
    """Gaussian-kernel smoothed CDF with a fixed bandwidth."""

    _CHUNK = 4_000_000  # max elements per broadcast block

    def __init__(self, values, bandwidth=None):
        v = as_1d_float(values)
        if v.size < 2:
            raise InvalidArgumentError("kernel CDF needs at least 2 observations")
        if bandwidth is None:
            bandwidth = silverman_bandwidth(v)
        self.values = v
        self.bandwidth = check_positive_scalar(bandwidth, "bandwidth")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        n = self.values.size
        step = max(1, self._CHUNK // n)
        parts = [
            special.ndtr((flat[i : i + step, None] - self.values) / self.bandwidth).mean(axis=1)
            for i in range(0, flat.size, step)
        ]
        out = np.concatenate(parts).reshape(np.shape(x)) if flat.size else np.empty(0)
        return float(out) if np.ndim(x) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (np.atleast_1d(x)[..., None] - self.values) / self.bandwidth
        dens = np.exp(-0.5 * z * z).mean(axis=-1) / (self.bandwidth * np.sqrt(2 * np.pi))
        return float(dens) if np.ndim(x) == 0 else dens.reshape(np.shape(x))

    def _rough_range(self):
        return (
            float(self.values.min() - 8 * self.bandwidth),
            float(self.values.max() + 8 * self.bandwidth),
        )


class LogNormalDist(Dist):
    """exp of a normal; mu/sigma live on the log scale."""

    def __init__(self, mu, sigma):
        self.mu = float(mu)
        self.sigma = check_positive_scalar(sigma, "sigma")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, special.ndtr((np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma), 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        p = check_probability(p)
        out = np.exp(self.mu + self.sigma * special.ndtri(p))
        return float(out) if np.ndim(p) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma
            dens = np.exp(-0.5 * z * z) / (np.maximum(x, 1e-300) * self.sigma * np.sqrt(2 * np.pi))
        out = np.where(x > 0, dens, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _rough_range(self):
        return 0.0, float(self.quantile(1 - 1e-12))

    def _default_bracket(self):
        return 0.0, self._rough_range()[1] * 10 + 1.0


class SquaredNormalDist(Dist):
    """Law of the square of a normal draw.

    ``folded=True`` is the law of W^2 for W ~ N(mu, sigma^2):
    F(y) = Phi((sqrt(y)-mu)/sigma) - Phi((-sqrt(y)-mu)/sigma).
    ``folded=False`` treats the square as order-preserving by clipping
    negatives to zero first (law of max(W,0)^2, with an atom at 0), i.e.
    F(y) = Phi((sqrt(y)-mu)/sigma); this keeps cutoffs the exact image of
    the latent normal cutoffs.
    """

    def __init__(self, mu, sigma, folded=False):
        self.mu = float(mu)
        self.sigma = check_positive_scalar(sigma, "sigma")
        self.folded = bool(folded)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.maximum(x, 0.0))
        hi = special.ndtr((r - self.mu) / self.sigma)
        if self.folded:
            out = hi - special.ndtr((-r - self.mu) / self.sigma)
        else:
            out = hi
        out = np.where(x >= 0, out, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        p = check_probability(p, open_interval=False)
        if self.folded:
            return invert_cdf(self, p, self._default_bracket())
        atom = special.ndtr(-self.mu / self.sigma)
        z = self.mu + self.sigma * special.ndtri(np.clip(p, 1e-300, 1 - 1e-16))
        out = np.where(np.asarray(p) <= atom, 0.0, np.maximum(z, 0.0) ** 2)
        return float(out) if np.ndim(p) == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.maximum(x, 1e-300))
        up = np.exp(-0.5 * ((r - self.mu) / self.sigma) ** 2)
        lo = np.exp(-0.5 * ((r + self.mu) / self.sigma) ** 2) if self.folded else 0.0
        dens = (up + lo) / (2 * self.sigma * r * np.sqrt(2 * np.pi))
        out = np.where(x > 0, dens, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _rough_range(self):
        top = (abs(self.mu) + 8 * self.sigma) ** 2
        return 0.0, float(top)

    def _default_bracket(self):
        return 0.0, self._rough_range()[1] * 10 + 1.0


class ProbitNormalDist(Dist):
    """Distribution on (0,1) of Z with probit(Z) ~ N(mu, sigma^2).

    Its CDF evaluated at t is exactly the placement-value ROC curve
    Phi(Phi^{-1}(t); mu, sigma).
    """

    def __init__(self, mu, sigma):
        self.mu = float(mu)
        self.sigma = check_positive_scalar(sigma, "sigma")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        u = special.ndtri(np.clip(t, 1e-300, 1 - 1e-16))
        out = np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, special.ndtr((u - self.mu) / self.sigma)))
        return float(out) if np.ndim(t) == 0 else out

    def quantile(self, p):
        p = check_probability(p)
        out = special.ndtr(self.mu + self.sigma * special.ndtri(p))
        return float(out) if np.ndim(p) == 0 else out

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        u = special.ndtri(np.clip(t, 1e-300, 1 - 1e-16))
        z = (u - self.mu) / self.sigma
        dens = np.exp(-0.5 * z * z + 0.5 * u * u) / self.sigma
        out = np.where((t > 0) & (t < 1), dens, 0.0)
        return float(out) if np.ndim(t) == 0 else out

    def _rough_range(self):
        return 0.0, 1.0

    def _default_bracket(self):
        return 1e-15, 1 - 1e-15


class ProbitNormalMixture(Dist):
    """Distribution on (0,1) of Z with probit(Z) ~ finite normal mixture."""

    def __init__(self, weights, locations, sigma):
        self._mix = NormalMixture(weights, locations, sigma)

    @property
    def weights(self):
        return self._mix.weights

    @property
    def locations(self):
        return self._mix.locations

    @property
    def sigma(self):
        return self._mix.scales

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        u = special.ndtri(np.clip(t, 1e-300, 1 - 1e-16))
        out = np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, self._mix.cdf(u)))
        return float(out) if np.ndim(t) == 0 else out

    def quantile(self, p):
        p = check_probability(p)
        out = special.ndtr(self._mix.quantile(p))
        return float(out) if np.ndim(p) == 0 else out

    def _rough_range(self):
        return 0.0, 1.0

    def _default_bracket(self):
        return 1e-15, 1 - 1e-15
