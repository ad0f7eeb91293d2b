"""Model-agnostic ROC machinery.

A :class:`RocPair` bundles either healthy/diseased distributions (general
variant) or a healthy distribution plus the placement-value distribution
(PV variant). All downstream quantities -- the ROC curve, AUC,
sensitivity/specificity -- are derived from the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import (
    Dist,
    EmpiricalCdf,
    GammaDist,
    LogNormalDist,
    NormalDist,
    ProbitNormalDist,
    f_cdf,
)
from .exceptions import InvalidArgumentError
from .validation import as_1d_float, check_probability

__all__ = [
    "HIGHER_IS_DISEASED",
    "LOWER_IS_DISEASED",
    "RocPair",
    "SeSp",
    "roc_eval",
    "auc",
    "se_sp_at",
    "delong_auc",
    "empirical_roc_points",
]

HIGHER_IS_DISEASED = "high"
LOWER_IS_DISEASED = "low"

AUC_GRID_POINTS = 2001  # uniform trapezoid grid on [0, 1]


@dataclass(frozen=True)
class SeSp:
    """Sensitivity/specificity at a threshold, in biomarker units."""

    c: float
    se: float
    sp: float


@dataclass(frozen=True)
class RocPair:
    """A fitted or analytic ROC model.

    Exactly one of ``f1`` (general variant) or ``f`` (placement-value
    variant, a distribution on (0,1)) must be set.
    """

    f0: Dist
    f1: Dist | None = None
    f: Dist | None = None
    orientation: str = HIGHER_IS_DISEASED

    def __post_init__(self):
        if (self.f1 is None) == (self.f is None):
            raise InvalidArgumentError("provide exactly one of f1 (general) or f (placement value)")
        if self.orientation not in (HIGHER_IS_DISEASED, LOWER_IS_DISEASED):
            raise InvalidArgumentError(f"unknown orientation {self.orientation!r}")
        if self.is_pv and self.orientation == LOWER_IS_DISEASED:
            raise InvalidArgumentError(
                "placement-value pairs are defined on the higher-is-diseased scale; "
                "normalize the data before constructing the pair"
            )

    @property
    def is_pv(self):
        return self.f is not None

    @staticmethod
    def general(f0, f1, orientation=HIGHER_IS_DISEASED):
        return RocPair(f0=f0, f1=f1, orientation=orientation)

    @staticmethod
    def placement(f0, f):
        return RocPair(f0=f0, f=f)

    def roc(self, t):
        return roc_eval(self, t)

    def auc(self):
        return auc(self)

    def se_sp(self, c):
        """Vectorized (se, sp) arrays at thresholds ``c``."""
        c = np.asarray(c, dtype=float)
        sp = np.asarray(self.f0.cdf(c), dtype=float)
        if self.is_pv:
            se = np.asarray(self.f.cdf(1.0 - sp), dtype=float)
        else:
            se = 1.0 - np.asarray(self.f1.cdf(c), dtype=float)
        if self.orientation == LOWER_IS_DISEASED:
            se, sp = 1.0 - se, 1.0 - sp
        return se, sp


def roc_eval(pair, t):
    """ROC curve value(s) at false-positive rate ``t`` in (0,1)."""
    t_arr = check_probability(np.asarray(t, dtype=float), "t")
    t_arr = np.atleast_1d(t_arr)
    if pair.is_pv:
        out = np.asarray(pair.f.cdf(t_arr), dtype=float)
    elif pair.orientation == HIGHER_IS_DISEASED:
        q = pair.f0.quantile(1.0 - t_arr)
        out = 1.0 - np.asarray(pair.f1.cdf(q), dtype=float)
    else:
        q = pair.f0.quantile(t_arr)
        out = np.asarray(pair.f1.cdf(q), dtype=float)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def _binormal_ab(pair):
    """(a, b) if the pair is binormal-equivalent in closed form, else None."""
    f0, f1 = pair.f0, pair.f1
    if isinstance(f0, NormalDist) and isinstance(f1, NormalDist):
        return (f1.mu - f0.mu) / f1.sigma, f0.sigma / f1.sigma
    if isinstance(f0, LogNormalDist) and isinstance(f1, LogNormalDist):
        # monotone transform of a binormal pair: same ROC curve
        return (f1.mu - f0.mu) / f1.sigma, f0.sigma / f1.sigma
    return None


def auc(pair):
    """Area under the ROC curve; closed form where available, else trapezoid."""
    if pair.orientation == LOWER_IS_DISEASED:
        if isinstance(pair.f0, EmpiricalCdf) and isinstance(pair.f1, EmpiricalCdf):
            # negating the data keeps the tie-corrected sum exact
            return delong_auc(-pair.f0.values, -pair.f1.values)
        flipped = RocPair(f0=pair.f0, f1=pair.f1, f=pair.f)
        return 1.0 - auc(flipped)
    if pair.is_pv:
        if isinstance(pair.f, ProbitNormalDist):
            return float(special.ndtr(-pair.f.mu / np.hypot(pair.f.sigma, 1.0)))
    else:
        ab = _binormal_ab(pair)
        if ab is not None:
            a, b = ab
            return float(special.ndtr(a / np.hypot(1.0, b)))
        f0, f1 = pair.f0, pair.f1
        if (
            isinstance(f0, GammaDist)
            and isinstance(f1, GammaDist)
            and abs(f0.shape - f1.shape) < 1e-12
        ):
            k = f0.shape
            return float(1.0 - f_cdf(f0.scale / f1.scale, 2 * k, 2 * k))
        if isinstance(f0, EmpiricalCdf) and isinstance(f1, EmpiricalCdf):
            return delong_auc(f0.values, f1.values)
    t = np.linspace(0.0, 1.0, AUC_GRID_POINTS)
    vals = np.empty_like(t)
    vals[0], vals[-1] = 0.0, 1.0
    vals[1:-1] = roc_eval(pair, t[1:-1])
    return float(np.clip(np.trapezoid(vals, t), 0.0, 1.0))


def se_sp_at(pair, c):
    """Sensitivity and specificity at threshold ``c``."""
    c = float(c)
    if not np.isfinite(c):
        raise InvalidArgumentError("threshold must be finite")
    se, sp = pair.se_sp(c)
    return SeSp(c=c, se=float(se), sp=float(sp))


def delong_auc(y0, y1):
    """Empirical (Mann-Whitney) AUC with ties counted 1/2, computed exactly."""
    y0 = as_1d_float(y0, "y0")
    y1 = as_1d_float(y1, "y1")
    if y0.size == 0 or y1.size == 0:
        raise InvalidArgumentError("both groups must be nonempty")
    s0 = np.sort(y0)
    below = np.searchsorted(s0, y1, side="left")   # strict wins per diseased value
    ties = np.searchsorted(s0, y1, side="right") - below
    return float((below.sum() + 0.5 * ties.sum()) / (y0.size * y1.size))


def empirical_roc_points(y0, y1):
    """Empirical ROC step points: (fpr, tpr) at all pooled thresholds.

    Includes (0,0) and (1,1); the trapezoid area under the returned polyline
    equals :func:`delong_auc` exactly.
    """
    y0 = as_1d_float(y0, "y0")
    y1 = as_1d_float(y1, "y1")
    if y0.size == 0 or y1.size == 0:
        raise InvalidArgumentError("both groups must be nonempty")
    thresholds = np.unique(np.concatenate([y0, y1]))[::-1]  # descending
    s0, s1 = np.sort(y0), np.sort(y1)
    fpr = 1.0 - np.searchsorted(s0, thresholds, side="right") / y0.size
    tpr = 1.0 - np.searchsorted(s1, thresholds, side="right") / y1.size
    pts = np.column_stack([
        np.concatenate([[0.0], fpr, [1.0]]),
        np.concatenate([[0.0], tpr, [1.0]]),
    ])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.diff(pts, axis=0) != 0, axis=1)
    return pts[keep]


def trapezoid_area(points):
    """Area under an (fpr, tpr) polyline from :func:`empirical_roc_points`."""
    pts = np.asarray(points, dtype=float)
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))
