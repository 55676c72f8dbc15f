"""Acceptance gate: one test per headline criterion, A1 through A9.

Each test states its thresholds inline and times the operation it bounds.
Oracles come from tests/oracles.py (mpmath at 50 digits, exhaustive
threshold enumeration); experiment bars run the shipped presets unmodified.
"""

from __future__ import annotations

import math
import time

import numpy as np

from unlescore.anomaly import Verdict
from unlescore.fileio import report_to_json_bytes
from unlescore.numstats import (
    MAD_CONSISTENCY,
    auc,
    fit_gaussian_mad,
    fit_gaussian_moment,
    logit,
    mad,
    roc_curve,
    std_normal_cdf,
    tpr_at_fpr,
)
from unlescore.pipeline import run_scoring
from unlescore.records import SplitLabel
from unlescore.scoring import fit_references, score_all
from unlescore.simbench import get_preset
from unlescore.simbench.experiments import (
    run_camouflage_experiment,
    run_preset,
    run_resilience,
    run_under_unlearned_experiment,
    run_utility,
)

from conftest import make_record
from oracles import brute_force_auc, brute_force_tpr_at_fpr, phi_mpmath


def test_a1_analytic_kernels_match_high_precision_oracles():
    """Phi within 1e-9 across [-8, 8]; logit/MAD/fit hand values exact; < 1 s."""
    grid = np.linspace(-8.0, 8.0, 1601)
    oracle = np.array([phi_mpmath(x) for x in grid])  # not timed: oracle only

    t0 = time.perf_counter()
    phi = std_normal_cdf(grid)
    g = logit(0.9)
    m = mad(np.array([1.0, 1, 2, 2, 4, 6, 9]))
    fit_m = fit_gaussian_moment(np.array([1.0, 2.0, 3.0]))
    fit_r = fit_gaussian_mad(np.array([0.0, 2.0]))
    elapsed = time.perf_counter() - t0

    assert float(np.abs(phi - oracle).max()) <= 1e-9
    assert abs(g - math.log(9.0)) < 1e-14  # ln(0.9/0.1)
    assert m == 1.0
    assert (fit_m.mu, fit_m.n) == (2.0, 3)
    assert abs(fit_m.sigma - math.sqrt(2.0 / 3.0)) < 1e-15
    assert (fit_r.mu, fit_r.sigma) == (1.0, MAD_CONSISTENCY)
    assert elapsed < 1.0


def test_a2_mad_consistency_constant_on_normal_draws():
    """c * MAD of 100000 seeded standard-normal draws within 2% of 1.0; < 1 s."""
    draws = np.random.default_rng(2).standard_normal(100_000)
    t0 = time.perf_counter()
    estimate = MAD_CONSISTENCY * mad(draws)
    elapsed = time.perf_counter() - t0
    assert abs(estimate - 1.0) <= 0.02
    assert elapsed < 1.0


def test_a3_roc_and_auc_equal_brute_force_exactly():
    """50 random score sets (<= 1000 samples): auc and every tpr_at_fpr
    bit-equal exhaustive enumeration; < 10 s."""
    rng = np.random.default_rng(3)
    targets = (0.001, 0.01, 0.1, 0.3)
    t0 = time.perf_counter()
    for case in range(50):
        n_pos = int(rng.integers(1, 500))
        n_neg = int(rng.integers(1, 500))
        if case % 2:  # alternate tie-heavy quantized sets and continuous ones
            pos = rng.integers(0, 50, size=n_pos) / 50.0
            neg = rng.integers(0, 50, size=n_neg) / 50.0
        else:
            pos = rng.uniform(size=n_pos)
            neg = rng.uniform(size=n_neg)
        pairs = [(float(s), True) for s in pos] + [(float(s), False) for s in neg]
        assert auc(pairs) == brute_force_auc(pos, neg)
        curve = roc_curve(pairs)
        for target in targets:
            assert tpr_at_fpr(curve, target) == brute_force_tpr_at_fpr(pos, neg, target)
    assert time.perf_counter() - t0 < 10.0


def test_a4_exact_retrain_ground_truth_separation():
    """Utility preset (3 classes, d=8, 600/class, separation 4): AUC >= 0.99,
    TPR@FPR=1e-3 >= 0.90, >= 95% of retained scores < 0.4; < 60 s."""
    t0 = time.perf_counter()
    report = run_utility(get_preset("utility"))
    elapsed = time.perf_counter() - t0

    evaluation = report.summary["evaluation"]
    assert evaluation["auc"] >= 0.99
    entry = next(e for e in evaluation["tpr_at_fpr"] if e["target_fpr"] == 1e-3)
    assert entry["tpr"] >= 0.90
    retained = [
        sv.unle_score
        for rec, sv in zip(report.records, report.scores)
        if rec.split is SplitLabel.RETAINED_MEMBER
    ]
    below = sum(1 for s in retained if s < 0.4) / len(retained)
    assert below >= 0.95
    assert elapsed < 60.0


def test_a5_under_unlearned_levels_correlate_with_scores():
    """Graded-recovery preset: Pearson r >= 0.7 between unlearning level and
    group mean score, and the group means strictly increase; < 120 s."""
    t0 = time.perf_counter()
    result = run_under_unlearned_experiment(get_preset("under_unlearned"))
    elapsed = time.perf_counter() - t0

    assert result.pearson_r >= 0.7
    means = result.group_mean_scores
    assert all(b > a for a, b in zip(means, means[1:]))
    assert elapsed < 120.0


def test_a6_camouflage_flagged_and_honest_control_clean():
    """Camouflage preset: both attack cases produce a non-clean verdict; the
    exact-retrain control is clean with under flags < 5% of requested; < 120 s."""
    config = get_preset("camouflage")
    t0 = time.perf_counter()
    template = run_camouflage_experiment(config, "template")
    random_case = run_camouflage_experiment(config, "random")
    control = run_camouflage_experiment(config, "control")
    elapsed = time.perf_counter() - t0

    assert template.verdict is not Verdict.CLEAN
    assert random_case.verdict is not Verdict.CLEAN
    assert control.verdict is Verdict.CLEAN
    n_requested = config.n_per_class  # one whole class was requested
    assert len(control.under_unlearned) / n_requested < 0.05
    assert elapsed < 120.0


def test_a7_exact_retrain_resilience_trajectory_is_flat():
    """Resilience preset, 5 sequential requests: exact_retrain keeps group 1's
    TPR within 0.02 across steps; approximate trajectories recorded; < 180 s."""
    config = get_preset("resilience")
    t0 = time.perf_counter()
    exact = run_resilience(config, "exact_retrain")
    recorded = {
        name: run_resilience(config, name).group1_tprs
        for name in ("fine_tune", "gradient_ascent")
    }
    elapsed = time.perf_counter() - t0

    tprs = exact.group1_tprs
    assert len(tprs) == 5
    assert max(tprs) - min(tprs) <= 0.02
    for name, trajectory in recorded.items():  # recorded, not bounded
        assert len(trajectory) == 5
        assert all(0.0 <= t <= 1.0 for t in trajectory), name
    assert elapsed < 180.0


def test_a8_scoring_100k_records_under_one_second():
    """fit + score + evaluate on 100000 records in < 1 s, no shadow models,
    timing section populated."""
    rng = np.random.default_rng(8)
    n = 100_000
    confs = rng.uniform(0.001, 0.999, size=(n, 2))
    splits = (
        [SplitLabel.NONMEMBER] * (n // 4)
        + [SplitLabel.UNLEARNED_MEMBER] * (n // 4)
        + [SplitLabel.RETAINED_MEMBER] * (n - n // 2)
    )
    records = [
        make_record(f"s-{i:06d}", float(confs[i, 0]), float(confs[i, 1]), splits[i])
        for i in range(n)
    ]

    t0 = time.perf_counter()
    report = run_scoring(records)
    elapsed = time.perf_counter() - t0

    assert len(report.scores) == n
    assert elapsed < 1.0
    assert set(report.timing) == {"fit_s", "score_s", "eval_s"}
    assert all(value > 0.0 for value in report.timing.values())


def test_a9_identities_degenerate_input_and_bench_determinism():
    """Score identities hold exactly on 10000 random records; identical-model
    input yields median score in [0.45, 0.55]; repeated seeded bench runs are
    byte-identical."""
    rng = np.random.default_rng(9)

    # (i) exact arithmetic identities on every scored vector
    records = [
        make_record(
            f"s-{i:05d}",
            float(c[0]),
            float(c[1]),
            (SplitLabel.NONMEMBER, SplitLabel.UNLEARNED_MEMBER, SplitLabel.RETAINED_MEMBER)[i % 3],
        )
        for i, c in enumerate(rng.uniform(0.0, 1.0, size=(10_000, 2)))
    ]
    vectors = score_all(records, fit_references(records))
    for v in vectors:
        assert v.l_diff == (1.0 + v.h_unl - v.h_ori) / 2.0
        assert v.d_liks == (v.d_a_lik + v.d_b_lik) / 2.0
        assert v.unle_score == (v.l_diff + v.d_liks) / 2.0

    # (ii) identical models: the score collapses to the 0.5 fixed point
    same = [
        make_record(
            f"d-{i:05d}",
            float(c),
            float(c),
            SplitLabel.NONMEMBER if i % 2 else SplitLabel.UNLEARNED_MEMBER,
        )
        for i, c in enumerate(rng.uniform(0.01, 0.99, size=2000))
    ]
    degenerate = run_scoring(same)
    for stats in degenerate.summary["unle_score_stats"].values():
        assert 0.45 <= stats["median"] <= 0.55

    # (iii) same preset, same seed: byte-identical artifacts
    config = get_preset("utility")
    first = run_preset(config)
    second = run_preset(config)
    assert first.keys() == second.keys()
    assert report_to_json_bytes(first["report"]) == report_to_json_bytes(second["report"])
