"""The metric engine: reference fits, per-sample completeness scores, baselines.

The completeness score of a sample combines two views of "this sample no
longer looks like a member of the unlearned model":

* a likelihood difference l_diff comparing the sample's non-membership
  likelihood under each model, each measured against a Gaussian fit of
  nonmember logit confidences for that model; and
* a change likelihood d_liks measuring how unusual the sample's confidence
  DROP is relative to how nonmember confidences moved between the models,
  once on the logit scale (moment fit) and once on the raw scale (robust
  MAD fit, so a few wild nonmembers cannot wash out the signal).

The final score is the arithmetic mean of the two; the mean is fixed, not
configurable, so the metric cannot drift silently between runs.

Reference fits use ALL supplied nonmembers. Fitting is a one-off sequential
reduction; scoring afterwards is a pure elementwise map, so partitioning the
records across workers cannot change any output bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSample, InvalidArgument
from .numstats import (
    CLAMP_EPS,
    GaussianFit,
    fit_gaussian_mad,
    fit_gaussian_moment,
    logit,
    std_normal_cdf,
)
from .records import ConfidenceRecord, ScoreVector, ShadowRecord, SplitLabel

# Below this many nonmembers the fits are legal but noisy; callers get a warning.
MIN_REFERENCE_POPULATION = 30


@dataclass(frozen=True, slots=True)
class ReferenceFits:
    """The four nonmember reference distributions, all from one subset.

    g_ori / g_unl: logit confidences under each model (moment fits).
    g_fix_a: logit-confidence deltas (moment fit).
    g_fix_b: raw-confidence deltas (robust MAD fit).
    """

    g_ori: GaussianFit
    g_unl: GaussianFit
    g_fix_a: GaussianFit
    g_fix_b: GaussianFit


def fit_reference_arrays(conf_ori: np.ndarray, conf_unl: np.ndarray) -> ReferenceFits:
    """Fit the four references from parallel arrays of nonmember confidences."""
    conf_ori = np.asarray(conf_ori, dtype=np.float64)
    conf_unl = np.asarray(conf_unl, dtype=np.float64)
    if conf_ori.shape != conf_unl.shape or conf_ori.ndim != 1:
        raise InvalidArgument("reference confidences must be parallel 1-d arrays")
    if conf_ori.size < 2:
        raise DegenerateSample("fitting references needs at least 2 nonmembers")
    if conf_ori.size < MIN_REFERENCE_POPULATION:
        warnings.warn(
            f"only {conf_ori.size} nonmembers; reference fits may be noisy "
            f"(recommended >= {MIN_REFERENCE_POPULATION})",
            stacklevel=2,
        )
    g_ori_vals = logit(conf_ori)
    g_unl_vals = logit(conf_unl)
    return ReferenceFits(
        g_ori=fit_gaussian_moment(g_ori_vals),
        g_unl=fit_gaussian_moment(g_unl_vals),
        g_fix_a=fit_gaussian_moment(g_unl_vals - g_ori_vals),
        g_fix_b=fit_gaussian_mad(conf_unl - conf_ori),
    )


def fit_references(records: Iterable[ConfidenceRecord]) -> ReferenceFits:
    """Fit the references on the nonmember subset of a record set."""
    nonmembers = [rec for rec in records if rec.split is SplitLabel.NONMEMBER]
    conf_ori = np.array([rec.conf_ori for rec in nonmembers], dtype=np.float64)
    conf_unl = np.array([rec.conf_unl for rec in nonmembers], dtype=np.float64)
    return fit_reference_arrays(conf_ori, conf_unl)


def score_arrays(conf_ori, conf_unl, refs: ReferenceFits) -> dict[str, np.ndarray]:
    """Vectorized scoring kernel; single code path for one sample or a million.

    Returns the seven score columns as parallel arrays. The composite columns
    are computed with the exact expressions of their identities, so
    l_diff == (1 + h_unl - h_ori)/2 etc. hold bit for bit.
    """
    conf_ori = np.asarray(conf_ori, dtype=np.float64)
    conf_unl = np.asarray(conf_unl, dtype=np.float64)
    g_ori = logit(conf_ori)
    g_unl = logit(conf_unl)
    h_ori = 1.0 - std_normal_cdf((g_ori - refs.g_ori.mu) / refs.g_ori.sigma)
    h_unl = 1.0 - std_normal_cdf((g_unl - refs.g_unl.mu) / refs.g_unl.sigma)
    l_diff = (1.0 + h_unl - h_ori) / 2.0
    phi_a = g_unl - g_ori
    phi_b = conf_unl - conf_ori
    d_a_lik = 1.0 - std_normal_cdf((phi_a - refs.g_fix_a.mu) / refs.g_fix_a.sigma)
    d_b_lik = 1.0 - std_normal_cdf((phi_b - refs.g_fix_b.mu) / refs.g_fix_b.sigma)
    d_liks = (d_a_lik + d_b_lik) / 2.0
    unle_score = (l_diff + d_liks) / 2.0
    return {
        "h_ori": h_ori,
        "h_unl": h_unl,
        "l_diff": l_diff,
        "d_a_lik": d_a_lik,
        "d_b_lik": d_b_lik,
        "d_liks": d_liks,
        "unle_score": unle_score,
    }


def score_sample(rec: ConfidenceRecord, refs: ReferenceFits) -> ScoreVector:
    """Score one record. Equivalent to score_all on a singleton list."""
    cols = score_arrays(np.array([rec.conf_ori]), np.array([rec.conf_unl]), refs)
    return ScoreVector(
        sample_id=rec.sample_id,
        h_ori=float(cols["h_ori"][0]),
        h_unl=float(cols["h_unl"][0]),
        l_diff=float(cols["l_diff"][0]),
        d_a_lik=float(cols["d_a_lik"][0]),
        d_b_lik=float(cols["d_b_lik"][0]),
        d_liks=float(cols["d_liks"][0]),
        unle_score=float(cols["unle_score"][0]),
    )


def score_all(records: Sequence[ConfidenceRecord], refs: ReferenceFits) -> list[ScoreVector]:
    """Score every record in one vectorized pass; output order matches input."""
    if not records:
        return []
    conf_ori = np.array([rec.conf_ori for rec in records], dtype=np.float64)
    conf_unl = np.array([rec.conf_unl for rec in records], dtype=np.float64)
    cols = score_arrays(conf_ori, conf_unl, refs)
    h_ori = cols["h_ori"].tolist()
    h_unl = cols["h_unl"].tolist()
    l_diff = cols["l_diff"].tolist()
    d_a_lik = cols["d_a_lik"].tolist()
    d_b_lik = cols["d_b_lik"].tolist()
    d_liks = cols["d_liks"].tolist()
    unle = cols["unle_score"].tolist()
    return [
        ScoreVector(rec.sample_id, h_ori[i], h_unl[i], l_diff[i], d_a_lik[i], d_b_lik[i], d_liks[i], unle[i])
        for i, rec in enumerate(records)
    ]


def lira_nmi(rec: ConfidenceRecord, shadow: ShadowRecord, which_model: str = "unl") -> float:
    """Offline likelihood-ratio non-membership score against out-model shadows.

    Fits a Gaussian to the logit shadow confidences of this sample and returns
    the mass at or above the observed logit confidence: high when the observed
    confidence is low relative to models that never saw the sample.
    """
    if which_model == "ori":
        observed = rec.conf_ori
    elif which_model == "unl":
        observed = rec.conf_unl
    else:
        raise InvalidArgument(f"which_model must be 'ori' or 'unl', got {which_model!r}")
    if len(shadow.shadow_confs) < 2:
        raise DegenerateSample(f"sample {rec.sample_id}: needs >= 2 shadow confidences")
    fit = fit_gaussian_moment(logit(np.asarray(shadow.shadow_confs, dtype=np.float64)))
    g_obs = logit(observed)
    return 1.0 - std_normal_cdf((g_obs - fit.mu) / fit.sigma)


def update_scores(lira_ori: float, lira_unl: float) -> tuple[float, float]:
    """Difference and ratio combinations of the two per-model baseline scores."""
    return lira_unl - lira_ori, lira_unl / max(lira_ori, CLAMP_EPS)


def with_baselines(
    vector: ScoreVector, lira_ori: float, lira_unl: float
) -> ScoreVector:
    """Return a copy of a ScoreVector with the baseline columns filled in."""
    diff, ratio = update_scores(lira_ori, lira_unl)
    return ScoreVector(
        sample_id=vector.sample_id,
        h_ori=vector.h_ori,
        h_unl=vector.h_unl,
        l_diff=vector.l_diff,
        d_a_lik=vector.d_a_lik,
        d_b_lik=vector.d_b_lik,
        d_liks=vector.d_liks,
        unle_score=vector.unle_score,
        lira_nmi=lira_unl,
        update_diff=diff,
        update_ratio=ratio,
    )
