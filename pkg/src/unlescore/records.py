"""Domain records shared by the scoring engine, detectors, and file formats.

A record set describes two models purely through per-sample confidences of
the true label: ``conf_ori`` from the model before unlearning and
``conf_unl`` from the model after. Membership status is trusted operator
metadata carried in ``split``; nothing here tries to infer it.

Confidences are accepted as any probabilities in [0, 1]; no calibration is
assumed or checked beyond the range, but both models must use the same
calibration for the scores to be meaningful.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable


class SplitLabel(enum.Enum):
    """Membership status of a sample relative to the unlearning request."""

    RETAINED_MEMBER = "retained_member"
    UNLEARNED_MEMBER = "unlearned_member"
    NONMEMBER = "nonmember"


@dataclass(frozen=True, slots=True)
class ConfidenceRecord:
    """True-label confidences of one sample under the original and unlearned model."""

    sample_id: str
    label: int
    conf_ori: float
    conf_unl: float
    split: SplitLabel
    group_id: int | None = None


@dataclass(frozen=True, slots=True)
class ShadowRecord:
    """Out-model confidences of one sample, for shadow-based baselines.

    ``shadow_confs`` holds one true-label confidence per shadow model trained
    without the sample. Length is checked where the values are consumed (a
    per-sample Gaussian fit needs at least two points), not at construction.
    """

    sample_id: str
    shadow_confs: tuple[float, ...]


@dataclass(frozen=True, slots=True)
class ScoreVector:
    """Per-sample completeness scores plus optional baseline columns.

    The three arithmetic identities below hold exactly (no tolerances):
    l_diff = (1 + h_unl - h_ori)/2, d_liks = (d_a_lik + d_b_lik)/2,
    unle_score = (l_diff + d_liks)/2.
    """

    sample_id: str
    h_ori: float
    h_unl: float
    l_diff: float
    d_a_lik: float
    d_b_lik: float
    d_liks: float
    unle_score: float
    lira_nmi: float | None = None
    update_diff: float | None = None
    update_ratio: float | None = None


@dataclass(frozen=True, slots=True)
class Violation:
    """One record-set rule breach. sample_id is None for set-level rules."""

    sample_id: str | None
    reason: str


@dataclass(frozen=True, slots=True)
class ValidationResult:
    ok: bool
    violations: tuple[Violation, ...]


def validate_record_set(records: Iterable[ConfidenceRecord]) -> ValidationResult:
    """Check record invariants and the set-level reference requirement.

    Returns ok only when every confidence is a finite probability, labels are
    non-negative integers, sample ids are unique, and at least one nonmember
    record exists (the reference distributions are fit on nonmembers).
    Violations are returned as data; nothing raises.
    """
    violations: list[Violation] = []
    seen: set[str] = set()
    nonmembers = 0
    for rec in records:
        if rec.sample_id in seen:
            violations.append(Violation(rec.sample_id, "duplicate sample_id"))
        seen.add(rec.sample_id)
        if not isinstance(rec.label, int) or rec.label < 0:
            violations.append(Violation(rec.sample_id, "label must be an integer >= 0"))
        for name in ("conf_ori", "conf_unl"):
            value = getattr(rec, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                violations.append(Violation(rec.sample_id, f"{name} is not a finite number"))
            elif not 0.0 <= value <= 1.0:
                violations.append(Violation(rec.sample_id, f"{name} confidence out of range [0, 1]"))
        if not isinstance(rec.split, SplitLabel):
            violations.append(Violation(rec.sample_id, "split is not a SplitLabel"))
        elif rec.split is SplitLabel.NONMEMBER:
            nonmembers += 1
    if nonmembers == 0:
        violations.append(Violation(None, "empty reference population: no nonmember records"))
    return ValidationResult(ok=not violations, violations=tuple(violations))


def split_partition(
    records: Iterable[ConfidenceRecord],
) -> dict[SplitLabel, list[ConfidenceRecord]]:
    """Partition a record set by split; every record lands in exactly one part."""
    parts: dict[SplitLabel, list[ConfidenceRecord]] = {label: [] for label in SplitLabel}
    for rec in records:
        parts[rec.split].append(rec)
    return parts
