"""Optimal-cutoff criteria, a robust 1-D optimizer, and uncertainty summaries.

Four criteria are supported: Youden's J (maximize se+sp-1), the
closest-to-(0,1) distance ER (minimize), the concordance product CZ
(maximize se*sp), and the index of union IU (minimize |se-AUC| + |sp-AUC|).
Objective ties within 1e-12 resolve to the smallest threshold; IU ties
first prefer the smaller |se - sp|.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import bayes
from .distributions import EmpiricalCdf, rng_stream
from .estimators import (
    MODEL_REGISTRY,
    BigammaRoc,
    EmpiricalRoc,
    KernelRoc,
    Sample,
    default_search_interval,
)
from .exceptions import (
    DegenerateSampleError,
    InvalidArgumentError,
    NumericFailureError,
    UnsupportedModelError,
)
from .roc_core import auc as pair_auc
from .validation import check_min_size

__all__ = [
    "Criterion",
    "CutoffResult",
    "objective",
    "optimize_cutoff",
    "optimize_family",
    "optimize_family_multi",
    "cutoff_posterior",
    "cutoff_posterior_multi",
    "cutoff_bootstrap",
    "bootstrap_analysis",
]

GRID_POINTS = 2001
TIE_TOL = 1e-12
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class Criterion(enum.Enum):
    """Cutoff criterion tag; J and CZ maximize, ER and IU minimize."""

    J = "j"
    ER = "er"
    CZ = "cz"
    IU = "iu"

    @property
    def maximize(self):
        return self in (Criterion.J, Criterion.CZ)

    @property
    def needs_auc(self):
        return self is Criterion.IU

    @staticmethod
    def from_key(key):
        if isinstance(key, Criterion):
            return key
        try:
            return Criterion(str(key).lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown criterion {key!r}") from None


@dataclass(frozen=True)
class CutoffResult:
    """A cutoff estimate with the se/sp it achieves and an optional interval."""

    criterion: Criterion
    c_star: float
    se: float
    sp: float
    objective_value: float
    interval: tuple[float, float] | None = None
    source: str = "point"  # "point" | "posterior" | "bootstrap"


def criterion_values(criterion, se, sp, auc_value=None):
    """Vectorized objective; shapes of se/sp broadcast through."""
    if criterion is Criterion.J:
        return se + sp - 1.0
    if criterion is Criterion.ER:
        return np.sqrt((1.0 - se) ** 2 + (1.0 - sp) ** 2)
    if criterion is Criterion.CZ:
        return se * sp
    if auc_value is None:
        raise InvalidArgumentError("IU needs the pair AUC")
    return np.abs(se - auc_value) + np.abs(sp - auc_value)


def objective(criterion, pair, c, auc_value=None):
    """Objective value of a criterion at threshold(s) ``c`` for a RocPair."""
    criterion = Criterion.from_key(criterion)
    se, sp = pair.se_sp(np.asarray(c, dtype=float))
    if criterion.needs_auc and auc_value is None:
        auc_value = pair_auc(pair)
    out = criterion_values(criterion, se, sp, auc_value)
    return float(out) if np.ndim(c) == 0 else out


# ---------------------------------------------------------------------------
# optimizer core (vectorized across draws)
# ---------------------------------------------------------------------------

class _SinglePairFamily:
    """Adapter presenting one RocPair as a 1-draw family."""

    n_draws = 1

    def __init__(self, pair, auc_value=None):
        self.pair = pair
        self._auc = auc_value

    def __getitem__(self, sl):
        return self

    def se_sp(self, c):
        cc = np.asarray(c, dtype=float)
        grid = cc if cc.ndim == 1 else cc.ravel()
        se, sp = self.pair.se_sp(grid)
        return np.asarray(se)[None, :], np.asarray(sp)[None, :]

    def auc(self):
        if self._auc is None:
            self._auc = pair_auc(self.pair)
        return np.asarray([self._auc])


def _pick_grid_index(criterion, vals, se, sp):
    """Per-draw argbest with tie handling (ties within 1e-12 of the best).

    Maximizers negate first; among ties the smallest threshold wins, except
    IU which prefers the smaller |se - sp| before the smaller threshold.
    """
    work = -vals if criterion.maximize else vals
    best = work.min(axis=1, keepdims=True)
    eligible = work <= best + TIE_TOL
    if criterion is Criterion.IU:
        gap = np.abs(se - sp)
        big = np.where(eligible, gap, np.inf)
        gap_best = big.min(axis=1, keepdims=True)
        eligible &= big <= gap_best + TIE_TOL
    m = vals.shape[1]
    first = np.where(eligible, np.arange(m)[None, :], m)
    return first.min(axis=1)


def _golden_refine(family, criterion, lo, hi, auc_vals, tol):
    """Vectorized golden-section search on per-draw brackets [lo, hi]."""
    sign = -1.0 if criterion.maximize else 1.0

    def f(c):
        se, sp = family.se_sp(c)
        return sign * criterion_values(criterion, se, sp, auc_vals[:, None] if auc_vals is not None else None)

    a = lo.copy()
    b = hi.copy()
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = f(x1[:, None])[:, 0]
    f2 = f(x2[:, None])[:, 0]
    while np.max(b - a) > tol:
        left = f1 <= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x1_new = b - _GOLDEN * (b - a)
        x2_new = a + _GOLDEN * (b - a)
        fx1 = f(x1_new[:, None])[:, 0]
        fx2 = f(x2_new[:, None])[:, 0]
        # reuse where possible is skipped for clarity; two evals per step
        x1, x2, f1, f2 = x1_new, x2_new, fx1, fx2
    return 0.5 * (a + b)


def optimize_family_multi(criteria, family, search, n_grid=GRID_POINTS, chunk=512):
    """Per-draw optimal cutoffs for several criteria, sharing the grid scan.

    Returns ``{Criterion: (n_draws,) array}``. The se/sp grid matrices are
    the dominant cost and are computed once per draw chunk.
    """
    criteria = [Criterion.from_key(c) for c in criteria]
    lo, hi = float(search[0]), float(search[1])
    if not np.isfinite([lo, hi]).all() or hi <= lo:
        raise InvalidArgumentError(f"search interval must be finite and nonempty, got {search!r}")
    grid = np.linspace(lo, hi, n_grid)
    tol = 1e-9 * (hi - lo)
    out = {c: np.empty(family.n_draws) for c in criteria}
    auc_all = family.auc() if any(c.needs_auc for c in criteria) else None
    for start in range(0, family.n_draws, chunk):
        sl = slice(start, min(start + chunk, family.n_draws))
        fam = family[sl]
        se, sp = fam.se_sp(grid)
        se = np.broadcast_to(se, (fam.n_draws, n_grid))
        sp = np.broadcast_to(sp, (fam.n_draws, n_grid))
        auc_vals = auc_all[sl] if auc_all is not None else None
        for criterion in criteria:
            a = auc_vals[:, None] if (auc_vals is not None and criterion.needs_auc) else None
            vals = criterion_values(criterion, se, sp, a)
            if not np.all(np.isfinite(vals)):
                bad = np.argwhere(~np.isfinite(vals))[0]
                raise NumericFailureError(
                    f"objective {criterion.value} is non-finite at c = {grid[bad[1]]:.6g}"
                )
            idx = _pick_grid_index(criterion, vals, se, sp)
            b_lo = grid[np.maximum(idx - 1, 0)]
            b_hi = grid[np.minimum(idx + 1, n_grid - 1)]
            a_ref = auc_vals if criterion.needs_auc else None
            out[criterion][sl] = _golden_refine(fam, criterion, b_lo, b_hi, a_ref, tol)
    return out


def optimize_family(criterion, family, search, n_grid=GRID_POINTS, chunk=512):
    """Per-draw optimal cutoffs for a draw family; returns an (n_draws,) array."""
    criterion = Criterion.from_key(criterion)
    return optimize_family_multi([criterion], family, search, n_grid, chunk)[criterion]


def _empirical_candidates(pair, lo, hi):
    """Midpoints between distinct pooled order statistics, plus the extremes."""
    values = np.concatenate([pair.f0.values, pair.f1.values])
    uniq = np.unique(values)
    mids = 0.5 * (uniq[1:] + uniq[:-1])
    return np.unique(np.concatenate([[lo], mids, [hi]]))


def optimize_cutoff(criterion, pair, search, auc_value=None):
    """Optimal cutoff of one criterion for a RocPair over a finite interval.

    Smooth pairs use a 2001-point grid scan plus golden-section refinement;
    empirical pairs scan midpoints of pooled order statistics exactly.
    """
    criterion = Criterion.from_key(criterion)
    lo, hi = float(search[0]), float(search[1])
    if not np.isfinite([lo, hi]).all() or hi <= lo:
        raise InvalidArgumentError(f"search interval must be finite and nonempty, got {search!r}")
    empirical = isinstance(pair.f0, EmpiricalCdf) and not pair.is_pv and isinstance(pair.f1, EmpiricalCdf)
    if criterion.needs_auc and auc_value is None:
        auc_value = pair_auc(pair)
    if empirical:
        cand = _empirical_candidates(pair, lo, hi)
        se, sp = pair.se_sp(cand)
        vals = criterion_values(criterion, se, sp, auc_value)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argwhere(~np.isfinite(vals))[0])
            raise NumericFailureError(f"objective non-finite at c = {cand[bad]:.6g}")
        idx = _pick_grid_index(criterion, vals[None, :], se[None, :], sp[None, :])[0]
        c_star = float(cand[idx])
    else:
        fam = _SinglePairFamily(pair, auc_value)
        c_star = float(optimize_family(criterion, fam, (lo, hi))[0])
    se, sp = pair.se_sp(c_star)
    return CutoffResult(
        criterion=criterion,
        c_star=c_star,
        se=float(se),
        sp=float(sp),
        objective_value=float(criterion_values(criterion, se, sp, auc_value)),
        source="point",
    )


# ---------------------------------------------------------------------------
# posterior and bootstrap summaries
# ---------------------------------------------------------------------------

def cutoff_posterior_multi(model, criteria, at_x=None, search=None):
    """Cutoff posteriors for several criteria, sharing per-draw grid work."""
    criteria = [Criterion.from_key(c) for c in criteria]
    if not getattr(model, "is_bayesian", False):
        raise InvalidArgumentError("cutoff_posterior needs a Bayesian model with retained draws")
    model._check_fitted()
    model._check_at_x(at_x)
    if search is None:
        search = default_search_interval(model.sample_)
    family = model.draw_family(at_x=at_x)
    draws_map = optimize_family_multi(criteria, family, search)
    point_pair = model.roc_pair(at_x=at_x)
    auc_value = pair_auc(point_pair) if any(c.needs_auc for c in criteria) else None
    flipped = getattr(model, "flipped_", False)
    out = {}
    for criterion in criteria:
        summ = bayes.summarize(draws_map[criterion])
        se, sp = point_pair.se_sp(summ.mean)
        c_star = -summ.mean if flipped else summ.mean
        interval = (-summ.hi, -summ.lo) if flipped else (summ.lo, summ.hi)
        a = auc_value if criterion.needs_auc else None
        out[criterion] = CutoffResult(
            criterion=criterion,
            c_star=float(c_star),
            se=float(se),
            sp=float(sp),
            objective_value=float(criterion_values(criterion, float(se), float(sp), a)),
            interval=(float(interval[0]), float(interval[1])),
            source="posterior",
        )
    return out


def cutoff_posterior(model, criterion, at_x=None, search=None):
    """Cutoff posterior from a fitted Bayesian model.

    Optimizes every retained draw's curve pair, reports the posterior mean
    threshold with an equal-tailed 95% interval, and the se/sp achieved at
    the posterior-mean threshold under the point-summary pair.
    """
    criterion = Criterion.from_key(criterion)
    return cutoff_posterior_multi(model, [criterion], at_x=at_x, search=search)[criterion]


_BOOT_KINDS = {
    "emp": EmpiricalRoc,
    "empirical": EmpiricalRoc,
    "nonpar": KernelRoc,
    "kernel": KernelRoc,
    "bigamma": BigammaRoc,
}


def _resample_group(rng, values, max_attempts=10):
    for _ in range(max_attempts):
        draw = values[rng.integers(0, values.size, values.size)]
        if np.min(draw) != np.max(draw):
            return draw
    raise DegenerateSampleError("resampling kept producing all-equal groups")


def _point_metrics(est, criteria, search):
    pair = est.roc_pair()
    auc_value = est.auc()
    out = {"auc": auc_value}
    for crit in criteria:
        crit = Criterion.from_key(crit)
        res = optimize_cutoff(crit, pair, search, auc_value=auc_value if crit.needs_auc else None)
        out[crit.value] = res.c_star
    return out


def bootstrap_analysis(sample, model_kind, criteria, n_boot=1000, seed=0, stream_base=10_000):
    """Stratified bootstrap of AUC and cutoffs for the frequentist models.

    Returns ``{metric: (estimate, lo, hi)}`` where the estimate comes from
    the original sample and the interval is the 2.5/97.5 percentile of the
    bootstrap replicates. Metrics are "auc" plus criterion keys.
    """
    if n_boot < 100:
        raise InvalidArgumentError("bootstrap needs at least 100 resamples")
    key = model_kind if isinstance(model_kind, str) else None
    cls = _BOOT_KINDS.get(str(key).lower()) if key is not None else model_kind
    if cls not in (EmpiricalRoc, KernelRoc, BigammaRoc):
        raise UnsupportedModelError(f"bootstrap supports emp/nonpar/bigamma, got {model_kind!r}")
    norm_sample, flipped = sample.normalized()
    if norm_sample.has_covariate:
        raise UnsupportedModelError("bootstrap models reject covariates")
    check_min_size(norm_sample.y0, 3, "healthy group")
    check_min_size(norm_sample.y1, 3, "diseased group")
    criteria = [Criterion.from_key(c) for c in criteria]
    search = default_search_interval(norm_sample)
    base = _point_metrics(cls().fit_sample(norm_sample), criteria, search)
    reps = {k: np.empty(n_boot) for k in base}
    for b in range(n_boot):
        rng = rng_stream(seed, stream_base + b)
        y0 = _resample_group(rng, norm_sample.y0)
        y1 = _resample_group(rng, norm_sample.y1)
        est = cls().fit_sample(Sample(y0, y1))
        for k, v in _point_metrics(est, criteria, search).items():
            reps[k][b] = v
    out = {}
    for k, v in reps.items():
        lo, hi = np.quantile(v, [0.025, 0.975])
        est_val = base[k]
        if flipped and k != "auc":
            est_val, lo, hi = -est_val, -hi, -lo
        out[k] = (float(est_val), float(lo), float(hi))
    return out


def cutoff_bootstrap(sample, model_kind, criterion, n_boot=1000, seed=0):
    """Percentile-bootstrap cutoff interval for the Empirical or Kernel model."""
    criterion = Criterion.from_key(criterion)
    metrics = bootstrap_analysis(sample, model_kind, [criterion], n_boot=n_boot, seed=seed)
    est, lo, hi = metrics[criterion.value]
    norm_sample, flipped = sample.normalized()
    key = model_kind if isinstance(model_kind, str) else None
    cls = _BOOT_KINDS.get(str(key).lower()) if key is not None else model_kind
    fitted = cls().fit_sample(norm_sample)
    pair = fitted.roc_pair()
    c_norm = -est if flipped else est
    se, sp = pair.se_sp(c_norm)
    auc_value = fitted.auc() if criterion.needs_auc else None
    return CutoffResult(
        criterion=criterion,
        c_star=float(est),
        se=float(se),
        sp=float(sp),
        objective_value=float(criterion_values(criterion, float(se), float(sp), auc_value)),
        interval=(float(lo), float(hi)),
        source="bootstrap",
    )
