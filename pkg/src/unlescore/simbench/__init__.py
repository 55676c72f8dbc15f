"""Desk-scale experiment harness.

Self-contained stand-in for full-scale unlearning studies: Gaussian-blob
datasets with held-out nonmembers, a deterministic softmax classifier,
exact and approximate unlearning algorithms, and the validation/benchmark
protocols (utility, under-unlearned ladder, camouflage, resilience, equity).
"""

from .data import SynthDataset, generate_blobs
from .model import (
    SimModel,
    TrainConfig,
    continue_training,
    continue_training_xy,
    cross_entropy,
    train,
)
from .unlearn import (
    UnlearningTask,
    classes_task,
    exact_retrain,
    export_confidences,
    fine_tune_unlearn,
    gradient_ascent_unlearn,
    partial_class_task,
    random_sample_task,
    total_class_task,
)
from .experiments import (
    ALGORITHMS,
    CAMOUFLAGE_CASES,
    PRESETS,
    BenchConfig,
    EquityResult,
    ResilienceResult,
    UnderUnlearnedResult,
    camouflage_report,
    get_preset,
    run_camouflage_experiment,
    run_equity,
    run_preset,
    run_resilience,
    run_under_unlearned_experiment,
    run_utility,
)

__all__ = [
    "ALGORITHMS",
    "CAMOUFLAGE_CASES",
    "PRESETS",
    "BenchConfig",
    "EquityResult",
    "ResilienceResult",
    "SimModel",
    "SynthDataset",
    "TrainConfig",
    "UnderUnlearnedResult",
    "UnlearningTask",
    "camouflage_report",
    "classes_task",
    "continue_training",
    "continue_training_xy",
    "cross_entropy",
    "exact_retrain",
    "export_confidences",
    "fine_tune_unlearn",
    "generate_blobs",
    "get_preset",
    "gradient_ascent_unlearn",
    "partial_class_task",
    "random_sample_task",
    "run_camouflage_experiment",
    "run_equity",
    "run_preset",
    "run_resilience",
    "run_under_unlearned_experiment",
    "run_utility",
    "total_class_task",
    "train",
]
