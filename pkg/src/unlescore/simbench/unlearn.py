"""Unlearning tasks, unlearning algorithms, and the bridge to the engine.

A task splits the train rows into forget and retain ids. Three algorithms
ship: exact retraining (ground truth), fine-tuning on the retained set, and
gradient ascent on the forget set. External algorithms can be added as any
callable (model_ori, dataset, task) -> SimModel.

export_confidences turns a (model_ori, model_unl, dataset, task) quadruple
into the engine's ConfidenceRecords: every train row becomes a member record
labeled by the task, every nonmember row a reference record, each carrying
its class id as group_id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from ..records import ConfidenceRecord, SplitLabel
from .data import SynthDataset
from .model import SimModel, TrainConfig, _with_bias, _batch_loss_and_grad, continue_training, train

_FINE_TUNE_STREAM = 1

KIND_RANDOM_SAMPLE = "random_sample"
KIND_PARTIAL_CLASS = "partial_class"
KIND_TOTAL_CLASS = "total_class"


@dataclass(frozen=True)
class UnlearningTask:
    """forget_ids/retain_ids are dataset row indices partitioning the train split."""

    kind: str
    forget_ids: np.ndarray
    retain_ids: np.ndarray
    k: int | None = None
    class_id: int | None = None
    fraction: float | None = None

    def __post_init__(self) -> None:
        self.forget_ids.setflags(write=False)
        self.retain_ids.setflags(write=False)
        if self.kind not in (KIND_RANDOM_SAMPLE, KIND_PARTIAL_CLASS, KIND_TOTAL_CLASS):
            raise InvalidArgument(f"unknown task kind {self.kind!r}")
        overlap = np.intersect1d(self.forget_ids, self.retain_ids)
        if overlap.size:
            raise InvalidArgument("forget and retain ids overlap")


def _partition(dataset: SynthDataset, forget_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    train = dataset.train_idx
    return train[forget_mask], train[~forget_mask]


def random_sample_task(dataset: SynthDataset, k: int, seed: int) -> UnlearningTask:
    """Forget k train rows drawn without replacement from a seeded generator."""
    n = len(dataset.train_idx)
    if not 0 < k < n:
        raise InvalidArgument("k must be in (0, train size)")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=k, replace=False)
    mask = np.zeros(n, dtype=bool)
    mask[chosen] = True
    forget, retain = _partition(dataset, mask)
    return UnlearningTask(kind=KIND_RANDOM_SAMPLE, forget_ids=forget, retain_ids=retain, k=k)


def partial_class_task(
    dataset: SynthDataset, class_id: int, fraction: float, seed: int
) -> UnlearningTask:
    """Forget a seeded random fraction of one class's train rows."""
    if not 0.0 < fraction < 1.0:
        raise InvalidArgument("fraction must be in (0, 1)")
    _check_class(dataset, class_id)
    train_labels = dataset.labels[dataset.train_idx]
    class_pos = np.nonzero(train_labels == class_id)[0]
    count = int(round(fraction * len(class_pos)))
    if count == 0 or count == len(class_pos):
        raise InvalidArgument("fraction leaves nothing to forget or nothing to keep")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(class_pos, size=count, replace=False)
    mask = np.zeros(len(dataset.train_idx), dtype=bool)
    mask[chosen] = True
    forget, retain = _partition(dataset, mask)
    return UnlearningTask(
        kind=KIND_PARTIAL_CLASS, forget_ids=forget, retain_ids=retain,
        class_id=class_id, fraction=fraction,
    )


def total_class_task(dataset: SynthDataset, class_id: int) -> UnlearningTask:
    """Forget every train row of one class."""
    _check_class(dataset, class_id)
    mask = dataset.labels[dataset.train_idx] == class_id
    forget, retain = _partition(dataset, mask)
    return UnlearningTask(
        kind=KIND_TOTAL_CLASS, forget_ids=forget, retain_ids=retain, class_id=class_id
    )


def classes_task(dataset: SynthDataset, class_ids: list[int]) -> UnlearningTask:
    """Forget several whole classes at once (a batch of total-class requests).

    class_id is recorded only for single-class batches.
    """
    if not class_ids:
        raise InvalidArgument("classes_task needs at least one class")
    for class_id in class_ids:
        _check_class(dataset, class_id)
    mask = np.isin(dataset.labels[dataset.train_idx], class_ids)
    forget, retain = _partition(dataset, mask)
    return UnlearningTask(
        kind=KIND_TOTAL_CLASS,
        forget_ids=forget,
        retain_ids=retain,
        class_id=class_ids[0] if len(class_ids) == 1 else None,
    )


def _check_class(dataset: SynthDataset, class_id: int) -> None:
    if not 0 <= class_id < dataset.n_classes:
        raise InvalidArgument(f"class_id {class_id} out of range")


def exact_retrain(dataset: SynthDataset, task: UnlearningTask, config: TrainConfig) -> SimModel:
    """Ground truth: retrain from scratch on retain_ids with the same config."""
    return train(dataset, config, indices=task.retain_ids)


def fine_tune_unlearn(
    model: SimModel, dataset: SynthDataset, task: UnlearningTask, epochs: int, lr: float
) -> SimModel:
    """Approximate unlearning by continued SGD on the retained rows only."""
    return continue_training(
        model, dataset, task.retain_ids, epochs, lr, stream_tag=_FINE_TUNE_STREAM
    )


def gradient_ascent_unlearn(
    model: SimModel, dataset: SynthDataset, task: UnlearningTask, epochs: int, lr: float
) -> SimModel:
    """Approximate unlearning by full-batch gradient ascent on the forget rows.

    One full-batch step per epoch. The loss is convex in the weights, so each
    step provably increases the forget-set cross-entropy. The training log
    records the forget-set loss before each step.
    """
    if lr <= 0.0:
        raise InvalidArgument("lr must be positive")
    Xb = _with_bias(dataset.features[task.forget_ids])
    y = dataset.labels[task.forget_ids]
    weights = model.weights.copy()
    log: list[float] = []
    for _ in range(epochs):
        loss, grad = _batch_loss_and_grad(weights, Xb, y)
        weights += lr * grad
        log.append(loss)
    return SimModel(
        weights=weights,
        train_config=model.train_config,
        training_log=model.training_log + tuple(log),
    )


def export_confidences(
    model_ori: SimModel,
    model_unl: SimModel,
    dataset: SynthDataset,
    task: UnlearningTask,
) -> list[ConfidenceRecord]:
    """Query both models on train and nonmember rows; emit engine records.

    Sample ids are "tr-<row>" and "nm-<row>" over dataset row indices, so the
    same sample keeps its id across experiments on one dataset.
    """
    if model_ori.n_classes != dataset.n_classes or model_unl.n_classes != dataset.n_classes:
        raise InvalidArgument("models and dataset disagree on class count")
    forget = set(task.forget_ids.tolist())
    records: list[ConfidenceRecord] = []
    for prefix, rows in (("tr", dataset.train_idx), ("nm", dataset.nonmember_idx)):
        X = dataset.features[rows]
        y = dataset.labels[rows]
        conf_ori = model_ori.confidence(X, y)
        conf_unl = model_unl.confidence(X, y)
        for i, row in enumerate(rows.tolist()):
            if prefix == "nm":
                split = SplitLabel.NONMEMBER
            elif row in forget:
                split = SplitLabel.UNLEARNED_MEMBER
            else:
                split = SplitLabel.RETAINED_MEMBER
            records.append(
                ConfidenceRecord(
                    sample_id=f"{prefix}-{row:06d}",
                    label=int(y[i]),
                    conf_ori=float(conf_ori[i]),
                    conf_unl=float(conf_unl[i]),
                    split=split,
                    group_id=int(y[i]),
                )
            )
    return records
