"""Pipeline tests: report assembly, evaluation wiring, baselines, metadata."""

from __future__ import annotations

import numpy as np
import pytest

from unlescore.anomaly import Verdict
from unlescore.errors import InvalidArgument
from unlescore.fileio import report_to_json_bytes
from unlescore.pipeline import (
    compute_scores,
    evaluate_vectors,
    fpr_granularity,
    run_scoring,
)
from unlescore.records import ShadowRecord, SplitLabel

from conftest import make_record, random_records


def separable_records(rng, n=40):
    """Unlearned members collapse to near-zero confidence; retained keep theirs."""
    records = []
    for i, c in enumerate(rng.uniform(0.3, 0.9, size=n)):
        records.append(make_record(f"nm-{i:03d}", float(c), float(c * 0.9), SplitLabel.NONMEMBER))
    for i, c in enumerate(rng.uniform(0.85, 0.99, size=n)):
        records.append(
            make_record(f"ul-{i:03d}", float(c), float(rng.uniform(0.01, 0.05)), SplitLabel.UNLEARNED_MEMBER)
        )
        records.append(
            make_record(f"rt-{i:03d}", float(c), float(c), SplitLabel.RETAINED_MEMBER)
        )
    return records


class TestComputeScores:
    def test_vectors_parallel_and_timed(self, rng):
        records = random_records(rng)
        refs, vectors, timing = compute_scores(records)
        assert [v.sample_id for v in vectors] == [r.sample_id for r in records]
        assert set(timing) == {"fit_s", "score_s"}
        assert all(t >= 0 for t in timing.values())

    def test_shadow_baselines_only_where_covered(self, rng):
        records = random_records(rng)
        shadows = [
            ShadowRecord(records[0].sample_id, (0.2, 0.4, 0.6)),
            ShadowRecord("absent-id", (0.2, 0.4, 0.6)),
        ]
        _, vectors, _ = compute_scores(records, shadows)
        assert vectors[0].lira_nmi is not None
        assert vectors[0].update_diff is not None
        assert all(v.lira_nmi is None for v in vectors[1:])


class TestEvaluateVectors:
    def test_summary_counts_and_stats(self, rng):
        records = random_records(rng, n_nonmember=50, n_unlearned=20, n_retained=10)
        _, vectors, _ = compute_scores(records)
        summary, roc = evaluate_vectors(records, vectors)
        assert summary["counts"] == {
            "nonmember": 50, "unlearned_member": 20, "retained_member": 10, "scored": 80,
        }
        stats = summary["unle_score_stats"]
        assert set(stats) == {"nonmember", "unlearned_member", "retained_member"}
        for entry in stats.values():
            assert 0.0 <= entry["median"] <= 1.0 and entry["n"] > 0
        assert roc is not None

    def test_median_matches_numpy(self, rng):
        records = random_records(rng, n_nonmember=31, n_unlearned=10, n_retained=10)
        _, vectors, _ = compute_scores(records)
        summary, _ = evaluate_vectors(records, vectors)
        for label in SplitLabel:
            values = [
                v.unle_score for r, v in zip(records, vectors) if r.split is label
            ]
            assert summary["unle_score_stats"][label.value]["median"] == np.median(values)

    def test_perfectly_separable_set(self, rng):
        records = separable_records(rng)
        _, vectors, _ = compute_scores(records)
        summary, _ = evaluate_vectors(records, vectors, fpr_targets=(0.025, 0.5))
        evaluation = summary["evaluation"]
        assert evaluation["auc"] == 1.0
        assert evaluation["covered"] == 80
        by_target = {e["target_fpr"]: e for e in evaluation["tpr_at_fpr"]}
        assert by_target[0.025]["tpr"] == 1.0
        assert by_target[0.025]["achieved_fpr"] <= 0.025

    def test_single_member_split_skips_evaluation(self, rng):
        records = [r for r in random_records(rng) if r.split is not SplitLabel.UNLEARNED_MEMBER]
        _, vectors, _ = compute_scores(records)
        summary, roc = evaluate_vectors(records, vectors)
        assert summary["evaluation"] is None
        assert roc is None

    def test_parallel_guard(self, rng):
        records = random_records(rng)
        _, vectors, _ = compute_scores(records)
        with pytest.raises(InvalidArgument):
            evaluate_vectors(records, vectors[:-1])

    def test_baseline_covered_subset(self, rng):
        records = random_records(rng)
        members = [r for r in records if r.split is not SplitLabel.NONMEMBER]
        # Shadow entries for 6 members of each split plus 3 nonmembers.
        chosen = (
            [r for r in members if r.split is SplitLabel.UNLEARNED_MEMBER][:6]
            + [r for r in members if r.split is SplitLabel.RETAINED_MEMBER][:6]
            + [r for r in records if r.split is SplitLabel.NONMEMBER][:3]
        )
        shadows = [ShadowRecord(r.sample_id, (0.2, 0.4, 0.6, 0.8)) for r in chosen]
        _, vectors, _ = compute_scores(records, shadows)
        summary, _ = evaluate_vectors(records, vectors)
        baselines = summary["baselines"]
        assert set(baselines) == {"lira_nmi", "update_diff", "update_ratio"}
        for entry in baselines.values():
            # Nonmember shadows never enter the ROC; only the 12 member rows.
            assert entry["covered"] == 12
            assert 0.0 <= entry["auc"] <= 1.0

    def test_no_baselines_section_without_shadows(self, rng):
        records = random_records(rng)
        _, vectors, _ = compute_scores(records)
        summary, _ = evaluate_vectors(records, vectors)
        assert "baselines" not in summary


class TestFprGranularity:
    def test_realizable(self):
        note = fpr_granularity((0.01, 0.5), 1000)
        assert note["min_nonzero_fpr"] == 0.001
        assert "realizable" in note["note"]

    def test_unrealizable_targets_called_out(self):
        note = fpr_granularity((1e-3,), 100)
        assert "not realizable" in note["note"]

    def test_no_negatives(self):
        note = fpr_granularity((1e-3,), None)
        assert "no retained negatives" in note["note"]


class TestRunScoring:
    def test_report_shape_and_metadata(self, rng):
        records = random_records(rng)
        report = run_scoring(records, seed=11, config_echo={"input": "x.csv"})
        meta = report.metadata
        assert meta["tool"] == "unlescore"
        assert meta["seed"] == 11
        assert meta["config"] == {"input": "x.csv"}
        assert meta["nonmember_count"] == 60
        assert meta["timestamp"] is None
        assert set(report.timing) == {"fit_s", "score_s", "eval_s"}
        assert report.anomaly is None
        assert len(report.scores) == len(report.records) == len(records)

    def test_detect_flag_attaches_anomaly(self, rng):
        records = separable_records(rng)
        report = run_scoring(records, detect=True, tau_u=0.3, robust_k=7.0, peak_ratio_min=0.4)
        assert report.anomaly is not None
        assert report.anomaly.tau_u == 0.3
        assert isinstance(report.anomaly.verdict, Verdict)

    def test_timing_can_be_suppressed_for_replays(self, rng):
        records = random_records(rng)
        a = run_scoring(records, include_timing=False)
        b = run_scoring(records, include_timing=False)
        assert a.timing is None
        assert report_to_json_bytes(a) == report_to_json_bytes(b)

    def test_small_reference_warning_propagates(self, rng):
        records = random_records(rng, n_nonmember=20)
        with pytest.warns(UserWarning):
            report = run_scoring(records)
        assert "reference_warning" in report.metadata

    def test_timestamp_is_opt_in(self, rng):
        records = random_records(rng)
        report = run_scoring(records, timestamp="2024-08-17T12:00:00Z")
        assert report.metadata["timestamp"] == "2024-08-17T12:00:00Z"
