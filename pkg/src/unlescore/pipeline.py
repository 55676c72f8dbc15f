"""Shared run pipeline: fit references, score, evaluate, assemble reports.

The CLI and the bench both go through these functions, so a command-line run
on a CSV and a bench run on synthetic data produce reports of identical
shape. Keeping the evaluation here also pins one convention package-wide:
positives are unlearned_member samples, negatives are retained_member
samples, and nonmembers never enter a ROC.
"""

from __future__ import annotations

import time
from typing import Sequence

from . import __version__ as _tool_version
from .anomaly import (
    DEFAULT_PEAK_RATIO_MIN,
    DEFAULT_ROBUST_K,
    DEFAULT_TAU_U,
    build_anomaly_report,
)
from .errors import InvalidArgument
from .fileio import EvalReport
from .numstats import RocCurve, auc, roc_curve, tpr_at_fpr
from .records import ConfidenceRecord, ScoreVector, ShadowRecord, SplitLabel
from .scoring import (
    MIN_REFERENCE_POPULATION,
    ReferenceFits,
    fit_references,
    lira_nmi,
    score_all,
    with_baselines,
)

DEFAULT_FPR_TARGETS = (1e-3,)

# Baseline columns that can rank a ROC when shadow confidences are present.
BASELINE_METRICS = ("lira_nmi", "update_diff", "update_ratio")


def compute_scores(
    records: Sequence[ConfidenceRecord],
    shadows: Sequence[ShadowRecord] | None = None,
) -> tuple[ReferenceFits, list[ScoreVector], dict]:
    """Fit references and score every record; optionally attach baselines.

    Baselines need per-sample shadow confidences; records without a matching
    shadow entry keep null baseline columns. Returns (refs, vectors, timing)
    with wall-clock seconds for the fit and score phases.
    """
    t0 = time.perf_counter()
    refs = fit_references(records)
    t1 = time.perf_counter()
    vectors = score_all(records, refs)
    t2 = time.perf_counter()
    timing = {"fit_s": t1 - t0, "score_s": t2 - t1}
    if shadows:
        by_id = {shadow.sample_id: shadow for shadow in shadows}
        for i, rec in enumerate(records):
            shadow = by_id.get(rec.sample_id)
            if shadow is None:
                continue
            vectors[i] = with_baselines(
                vectors[i],
                lira_ori=lira_nmi(rec, shadow, "ori"),
                lira_unl=lira_nmi(rec, shadow, "unl"),
            )
    return refs, vectors, timing


def _metric_value(sv: ScoreVector, metric: str) -> float | None:
    return getattr(sv, metric)


def evaluate_vectors(
    records: Sequence[ConfidenceRecord],
    vectors: Sequence[ScoreVector],
    fpr_targets: Sequence[float] = DEFAULT_FPR_TARGETS,
) -> tuple[dict, RocCurve | None]:
    """Build the summary section and the primary ROC from scored records.

    The summary always contains per-split counts and score statistics; when
    both member splits are present it adds AUC and TPR@FPR for the main score
    and for every baseline column with full coverage on the evaluated splits.
    """
    if len(records) != len(vectors):
        raise InvalidArgument("records and vectors must be parallel sequences")
    counts = {label.value: 0 for label in SplitLabel}
    for rec in records:
        counts[rec.split.value] += 1
    summary: dict = {"counts": {**counts, "scored": len(vectors)}}

    stats: dict[str, dict[str, float]] = {}
    for label in SplitLabel:
        values = sorted(
            sv.unle_score for rec, sv in zip(records, vectors) if rec.split is label
        )
        if not values:
            continue
        n = len(values)
        mid = n // 2
        median = values[mid] if n % 2 else (values[mid - 1] + values[mid]) / 2.0
        stats[label.value] = {"mean": sum(values) / n, "median": median, "n": n}
    summary["unle_score_stats"] = stats

    n_pos = counts[SplitLabel.UNLEARNED_MEMBER.value]
    n_neg = counts[SplitLabel.RETAINED_MEMBER.value]
    if n_pos == 0 or n_neg == 0:
        summary["evaluation"] = None
        return summary, None

    member_rows = [
        (rec, sv)
        for rec, sv in zip(records, vectors)
        if rec.split is not SplitLabel.NONMEMBER
    ]

    def metric_summary(metric: str) -> tuple[dict, RocCurve] | None:
        # Baselines may cover only the subset with shadow entries; evaluate
        # over that subset and record its size.
        pairs = [
            (value, rec.split is SplitLabel.UNLEARNED_MEMBER)
            for rec, sv in member_rows
            if (value := _metric_value(sv, metric)) is not None
        ]
        positives = sum(1 for _, pos in pairs if pos)
        if positives == 0 or positives == len(pairs):
            return None
        curve = roc_curve(pairs)
        entries = []
        for target in fpr_targets:
            tpr, threshold, achieved = tpr_at_fpr(curve, target)
            entries.append(
                {
                    "target_fpr": target,
                    "tpr": tpr,
                    "threshold": threshold,
                    "achieved_fpr": achieved,
                }
            )
        return {"auc": auc(pairs), "tpr_at_fpr": entries, "covered": len(pairs)}, curve

    main = metric_summary("unle_score")
    assert main is not None  # unle_score is always populated, both splits present
    evaluation, primary_roc = main
    baselines: dict[str, dict] = {}
    for metric in BASELINE_METRICS:
        result = metric_summary(metric)
        if result is not None:
            baselines[metric] = result[0]
    summary["evaluation"] = evaluation
    if baselines:
        summary["baselines"] = baselines
    return summary, primary_roc


def fpr_granularity(
    fpr_targets: Sequence[float], negative_count: int | None
) -> dict:
    """The achieved-FPR granularity note carried in every report's metadata."""
    note: dict = {"targets": list(fpr_targets), "negative_count": negative_count}
    if not negative_count:
        note["note"] = "no retained negatives; no ROC evaluated"
        return note
    min_nonzero = 1.0 / negative_count
    note["min_nonzero_fpr"] = min_nonzero
    unrealizable = [t for t in fpr_targets if t < min_nonzero]
    if unrealizable:
        note["note"] = (
            f"targets below 1/{negative_count} are not realizable at this scale; "
            "the conservative (fpr=0) threshold is reported for them"
        )
    else:
        note["note"] = "all targets realizable at this negative count"
    return note


def base_metadata(
    config_echo: dict | None,
    seed: int | None,
    fpr_targets: Sequence[float],
    negative_count: int | None,
    nonmember_count: int,
    timestamp: str | None = None,
) -> dict:
    meta = {
        "tool": "unlescore",
        "tool_version": _tool_version,
        "config": config_echo,
        "seed": seed,
        "timestamp": timestamp,
        "fpr_granularity": fpr_granularity(fpr_targets, negative_count),
        "nonmember_count": nonmember_count,
    }
    if nonmember_count < MIN_REFERENCE_POPULATION:
        meta["reference_warning"] = (
            f"only {nonmember_count} nonmembers; reference fits may be noisy"
        )
    return meta


def run_scoring(
    records: Sequence[ConfidenceRecord],
    shadows: Sequence[ShadowRecord] | None = None,
    fpr_targets: Sequence[float] = DEFAULT_FPR_TARGETS,
    config_echo: dict | None = None,
    seed: int | None = None,
    detect: bool = False,
    tau_u: float = DEFAULT_TAU_U,
    robust_k: float = DEFAULT_ROBUST_K,
    peak_ratio_min: float = DEFAULT_PEAK_RATIO_MIN,
    timestamp: str | None = None,
    include_timing: bool = True,
) -> EvalReport:
    """The full score-and-evaluate pipeline, shared by CLI and bench."""
    refs, vectors, timing = compute_scores(records, shadows)
    t0 = time.perf_counter()
    summary, roc = evaluate_vectors(records, vectors, fpr_targets)
    anomaly = None
    if detect:
        anomaly = build_anomaly_report(
            records,
            vectors,
            tau_u=tau_u,
            robust_k=robust_k,
            peak_ratio_min=peak_ratio_min,
        )
    timing["eval_s"] = time.perf_counter() - t0
    counts = summary["counts"]
    metadata = base_metadata(
        config_echo=config_echo,
        seed=seed,
        fpr_targets=fpr_targets,
        negative_count=counts[SplitLabel.RETAINED_MEMBER.value] or None,
        nonmember_count=counts[SplitLabel.NONMEMBER.value],
        timestamp=timestamp,
    )
    return EvalReport(
        metadata=metadata,
        records=tuple(records),
        scores=tuple(vectors),
        summary=summary,
        roc=roc,
        anomaly=anomaly,
        timing=timing if include_timing else None,
    )
