"""Lifecycle anomaly detection over completeness scores.

Two failure modes are monitored after every unlearning request:

* under-unlearning: a requested sample still scores like a retained member
  (score at or below tau_u);
* over-unlearning: retained samples were damaged, visible either as a small
  subset whose scores deviate from the retained majority (robust z-test) or
  as the retained score mass losing its single concentrated peak (histogram
  peak-ratio test).

Both detectors are pure functions of the score multiset; flag lists are
sorted canonically so permuted inputs give identical output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument
from .numstats import MAD_CONSISTENCY, SIGMA_FLOOR, mad
from .records import ConfidenceRecord, ScoreVector, SplitLabel

DEFAULT_TAU_U = 0.5
DEFAULT_ROBUST_K = 3.5
DEFAULT_PEAK_RATIO_MIN = 0.5
PEAK_BINS = 20


class Verdict(enum.Enum):
    CLEAN = "clean"
    UNDER_UNLEARNING = "under_unlearning"
    OVER_UNLEARNING = "over_unlearning"
    BOTH = "both"


@dataclass(frozen=True, slots=True)
class AnomalyReport:
    """Outcome of both detectors plus the thresholds that produced it."""

    under_unlearned: tuple[tuple[str, float], ...]
    over_unlearned: tuple[tuple[str, float], ...]
    retained_peak_ratio: float
    verdict: Verdict
    tau_u: float
    robust_k: float
    peak_ratio_min: float


def detect_under_unlearning(
    scores: Sequence[ScoreVector], tau_u: float = DEFAULT_TAU_U
) -> list[tuple[str, float]]:
    """Flag requested samples whose score says they still look retained.

    Input must be the scores of unlearned_member samples only. Returns
    (sample_id, unle_score) for every score <= tau_u, ascending by score.
    """
    if not 0.0 <= tau_u <= 1.0:
        raise InvalidArgument("tau_u must be in [0, 1]")
    flagged = [(sv.sample_id, sv.unle_score) for sv in scores if sv.unle_score <= tau_u]
    flagged.sort(key=lambda item: (item[1], item[0]))
    return flagged


def detect_over_unlearning(
    scores: Sequence[ScoreVector],
    k: float = DEFAULT_ROBUST_K,
    peak_ratio_min: float = DEFAULT_PEAK_RATIO_MIN,
) -> tuple[list[tuple[str, float]], float]:
    """Run both over-unlearning tests on retained-member scores.

    Deviation test: robust z of each score against the retained median with
    c*MAD scale (floored, so a zero MAD cannot divide by zero); flag |z| > k.
    Peak test: histogram the scores into 20 equal bins over [0, 1]; the test
    fails when the heaviest bin holds less than peak_ratio_min of the mass.

    Returns (flags sorted by |z| descending, peak_ratio). The caller combines
    both signals into a verdict.
    """
    if len(scores) < 10:
        raise InvalidArgument("over-unlearning detection needs >= 10 retained scores")
    if not k > 0.0:
        raise InvalidArgument("k must be positive")
    if not 0.0 < peak_ratio_min < 1.0:
        raise InvalidArgument("peak_ratio_min must be in (0, 1)")
    values = np.array([sv.unle_score for sv in scores], dtype=np.float64)
    center = float(np.median(values))
    scale = max(MAD_CONSISTENCY * mad(values), SIGMA_FLOOR)
    z = (values - center) / scale
    flags = [
        (sv.sample_id, float(z[i])) for i, sv in enumerate(scores) if abs(z[i]) > k
    ]
    flags.sort(key=lambda item: (-abs(item[1]), item[0]))
    counts, _ = np.histogram(values, bins=PEAK_BINS, range=(0.0, 1.0))
    peak_ratio = float(counts.max()) / float(values.size)
    return flags, peak_ratio


def build_anomaly_report(
    records: Sequence[ConfidenceRecord],
    scores: Sequence[ScoreVector],
    tau_u: float = DEFAULT_TAU_U,
    robust_k: float = DEFAULT_ROBUST_K,
    peak_ratio_min: float = DEFAULT_PEAK_RATIO_MIN,
) -> AnomalyReport:
    """Run both detectors on a scored record set and combine the verdict.

    records and scores must be parallel (as produced by score_all). The
    over-unlearning bit fires on deviation flags or a failed peak test; the
    under-unlearning bit fires on any under flag.
    """
    if len(records) != len(scores):
        raise InvalidArgument("records and scores must be parallel sequences")
    requested = [sv for rec, sv in zip(records, scores) if rec.split is SplitLabel.UNLEARNED_MEMBER]
    retained = [sv for rec, sv in zip(records, scores) if rec.split is SplitLabel.RETAINED_MEMBER]
    under = detect_under_unlearning(requested, tau_u)
    over, peak_ratio = detect_over_unlearning(retained, robust_k, peak_ratio_min)
    under_bit = bool(under)
    over_bit = bool(over) or peak_ratio < peak_ratio_min
    if under_bit and over_bit:
        verdict = Verdict.BOTH
    elif under_bit:
        verdict = Verdict.UNDER_UNLEARNING
    elif over_bit:
        verdict = Verdict.OVER_UNLEARNING
    else:
        verdict = Verdict.CLEAN
    return AnomalyReport(
        under_unlearned=tuple(under),
        over_unlearned=tuple(over),
        retained_peak_ratio=peak_ratio,
        verdict=verdict,
        tau_u=tau_u,
        robust_k=robust_k,
        peak_ratio_min=peak_ratio_min,
    )
