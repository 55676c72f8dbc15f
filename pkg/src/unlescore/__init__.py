"""Black-box measurement of sample-level unlearning completeness.

Given per-sample confidences from an original model and an unlearned model,
plus a nonmember reference population, this package scores how completely
each sample's lineage was removed (UnleScore in [0, 1]), evaluates the
scores against ground truth (ROC, AUC, TPR at a low-FPR budget), flags
under-/over-unlearning anomalies, and ships a deterministic desk-scale bench
that reproduces the qualitative validation protocols end to end.
"""

__version__ = "0.1.0"

from .anomaly import (
    AnomalyReport,
    Verdict,
    build_anomaly_report,
    detect_over_unlearning,
    detect_under_unlearning,
)
from .errors import DegenerateSample, InvalidArgument, ParseError, UnlescoreError
from .estimator import CompletenessScorer
from .fileio import (
    EvalReport,
    read_confidence_file,
    read_report,
    read_shadow_file,
    write_confidence_file,
    write_report,
)
from .numstats import (
    GaussianFit,
    RocCurve,
    auc,
    fit_gaussian_mad,
    fit_gaussian_moment,
    logit,
    mad,
    pearson,
    roc_curve,
    std_normal_cdf,
    tpr_at_fpr,
)
from .pipeline import compute_scores, evaluate_vectors, run_scoring
from .records import (
    ConfidenceRecord,
    ScoreVector,
    ShadowRecord,
    SplitLabel,
    ValidationResult,
    Violation,
    validate_record_set,
)
from .scoring import (
    ReferenceFits,
    fit_references,
    lira_nmi,
    score_all,
    score_sample,
    update_scores,
)

__all__ = [
    "AnomalyReport",
    "CompletenessScorer",
    "ConfidenceRecord",
    "DegenerateSample",
    "EvalReport",
    "GaussianFit",
    "InvalidArgument",
    "ParseError",
    "ReferenceFits",
    "RocCurve",
    "ScoreVector",
    "ShadowRecord",
    "SplitLabel",
    "UnlescoreError",
    "ValidationResult",
    "Verdict",
    "Violation",
    "__version__",
    "auc",
    "build_anomaly_report",
    "compute_scores",
    "detect_over_unlearning",
    "detect_under_unlearning",
    "evaluate_vectors",
    "fit_gaussian_mad",
    "fit_gaussian_moment",
    "fit_references",
    "lira_nmi",
    "logit",
    "mad",
    "pearson",
    "read_confidence_file",
    "read_report",
    "read_shadow_file",
    "roc_curve",
    "run_scoring",
    "score_all",
    "score_sample",
    "std_normal_cdf",
    "tpr_at_fpr",
    "update_scores",
    "validate_record_set",
    "write_confidence_file",
    "write_report",
]
