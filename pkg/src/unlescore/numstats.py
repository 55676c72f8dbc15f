"""Numerical primitives for the completeness metric.

Everything here is a pure function over immutable inputs. Conventions fixed
for the whole package:

* logit clamps its argument into [CLAMP_EPS, 1 - CLAMP_EPS] so confidences of
  exactly 0 or 1 stay finite and order-preserving.
* Gaussian fits use the population (n-divisor) standard deviation and floor
  the scale at SIGMA_FLOOR so degenerate (zero-variance) populations yield
  well-defined likelihoods that push scores toward the no-evidence value 0.5.
* The robust fit uses c * MAD with c = 1 / (inverse normal CDF at 0.75), the
  unique constant making MAD consistent with the standard deviation of a
  normal sample.
* Fits sort their input first, so results depend only on the multiset of
  values, bit for bit.
* ROC classification rule: score >= threshold predicts positive (unlearned).
  Thresholds are swept over the distinct observed scores plus a +infinity
  sentinel; no interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .errors import DegenerateSample, InvalidArgument

CLAMP_EPS = 1e-7
SIGMA_FLOOR = 1e-6
MAD_CONSISTENCY = 1.4826022185

METHOD_MOMENT = "moment"
METHOD_ROBUST_MAD = "robust_mad"


@dataclass(frozen=True, slots=True)
class GaussianFit:
    """A location/scale pair with its provenance.

    sigma is always >= SIGMA_FLOOR; n is the population size the fit saw.
    """

    mu: float
    sigma: float
    n: int
    method: str

    def __post_init__(self) -> None:
        if self.method not in (METHOD_MOMENT, METHOD_ROBUST_MAD):
            raise InvalidArgument(f"unknown fit method: {self.method!r}")
        if not self.sigma > 0.0:
            raise InvalidArgument("sigma must be positive")
        if self.n < 2:
            raise InvalidArgument("a Gaussian fit needs at least 2 points")


@dataclass(frozen=True, slots=True)
class RocCurve:
    """Exact ROC points, ordered by descending threshold (ascending FPR).

    thresholds[0] is the +infinity sentinel (nothing predicted positive);
    the last point is the minimum score, where everything is positive, so the
    curve always contains (fpr=0, tpr=0) and (fpr=1, tpr=1).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    positive_count: int
    negative_count: int

    def __post_init__(self) -> None:
        for arr in (self.thresholds, self.fpr, self.tpr):
            arr.setflags(write=False)


def logit(p):
    """Log-odds of p, clamped so the output is finite for p in [0, 1].

    Accepts a scalar or an array; returns the matching shape.
    """
    clamped = np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)
    out = np.log(clamped / (1.0 - clamped))
    if np.ndim(p) == 0:
        return float(out)
    return out


def std_normal_cdf(x):
    """Standard-normal CDF, accurate to well below 1e-9 absolute error.

    Accepts a scalar or an array. Non-finite input raises InvalidArgument.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("std_normal_cdf requires finite input")
    out = ndtr(arr)
    if np.ndim(x) == 0:
        return float(out)
    return out


def _as_sorted_array(xs: Iterable[float]) -> np.ndarray:
    # Sorting makes every downstream reduction a pure function of the
    # multiset of values, so permuted inputs give bit-identical fits.
    return np.sort(np.asarray(xs, dtype=np.float64))


def fit_gaussian_moment(xs: Iterable[float]) -> GaussianFit:
    """Fit mean and population standard deviation, scale floored."""
    data = _as_sorted_array(xs)
    if data.size < 2:
        raise DegenerateSample("moment fit needs at least 2 points")
    sigma = max(float(data.std(ddof=0)), SIGMA_FLOOR)
    return GaussianFit(mu=float(data.mean()), sigma=sigma, n=int(data.size), method=METHOD_MOMENT)


def mad(xs: Iterable[float]) -> float:
    """Median absolute deviation from the median.

    Even-length medians are the mean of the two middle order statistics.
    """
    data = np.asarray(xs, dtype=np.float64)
    if data.size < 1:
        raise DegenerateSample("mad needs at least 1 point")
    center = np.median(data)
    return float(np.median(np.abs(data - center)))


def fit_gaussian_mad(xs: Iterable[float]) -> GaussianFit:
    """Fit mean plus the MAD-based robust scale c * MAD, floored."""
    data = _as_sorted_array(xs)
    if data.size < 2:
        raise DegenerateSample("robust fit needs at least 2 points")
    sigma = max(MAD_CONSISTENCY * mad(data), SIGMA_FLOOR)
    return GaussianFit(mu=float(data.mean()), sigma=sigma, n=int(data.size), method=METHOD_ROBUST_MAD)


def _scores_and_mask(pairs) -> tuple[np.ndarray, np.ndarray]:
    rows = list(pairs)
    scores = np.array([float(s) for s, _ in rows], dtype=np.float64)
    positive = np.array([bool(p) for _, p in rows], dtype=bool)
    return scores, positive


def roc_curve(pairs: Iterable[tuple[float, bool]]) -> RocCurve:
    """Exact ROC over all distinct thresholds of (score, is_positive) pairs.

    Rule: score >= threshold predicts positive. Needs at least one positive
    and one negative, otherwise InvalidArgument.
    """
    scores, positive = _scores_and_mask(pairs)
    n_pos = int(positive.sum())
    n_neg = int(scores.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise InvalidArgument("roc_curve needs at least one positive and one negative")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = positive[order]
    # Last index of each tie group: classification only changes at distinct scores.
    boundary = np.nonzero(np.append(s[:-1] != s[1:], True))[0]
    cum_tp = np.cumsum(y)
    cum_fp = np.cumsum(~y)
    thresholds = np.concatenate(([np.inf], s[boundary]))
    tp = np.concatenate(([0], cum_tp[boundary]))
    fp = np.concatenate(([0], cum_fp[boundary]))
    return RocCurve(
        thresholds=thresholds,
        fpr=fp / n_neg,
        tpr=tp / n_pos,
        positive_count=n_pos,
        negative_count=n_neg,
    )


def tpr_at_fpr(curve: RocCurve, target_fpr: float) -> tuple[float, float, float]:
    """TPR at the smallest swept threshold whose FPR fits the budget.

    Returns (tpr, threshold, achieved_fpr) with achieved_fpr <= target_fpr
    always; the sentinel threshold (fpr=0) guarantees a feasible choice even
    when the negative count cannot realize the target.
    """
    if not 0.0 < target_fpr < 1.0:
        raise InvalidArgument("target_fpr must be in (0, 1)")
    # fpr is ascending along descending thresholds; the last index within
    # budget is the smallest admissible threshold.
    idx = int(np.searchsorted(curve.fpr, target_fpr, side="right")) - 1
    return float(curve.tpr[idx]), float(curve.thresholds[idx]), float(curve.fpr[idx])


def auc(pairs: Iterable[tuple[float, bool]]) -> float:
    """Mann-Whitney AUC with 0.5 credit for ties.

    Computed through average ranks, which equals pair counting exactly (rank
    sums are multiples of 0.5 and exact in floating point at these sizes).
    """
    scores, positive = _scores_and_mask(pairs)
    n_pos = int(positive.sum())
    n_neg = int(scores.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise InvalidArgument("auc needs at least one positive and one negative")
    ranks = rankdata(scores, method="average")
    u_stat = float(ranks[positive].sum()) - n_pos * (n_pos + 1) / 2.0
    return u_stat / (n_pos * n_neg)


def pearson(xs: Iterable[float], ys: Iterable[float]) -> float:
    """Product-moment correlation; zero-variance input raises DegenerateSample."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size != y.size:
        raise InvalidArgument("pearson needs equal-length inputs")
    if x.size < 2:
        raise InvalidArgument("pearson needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSample("pearson is undefined for zero-variance input")
    return float(dx @ dy) / (sx * sy)
