"""Deterministic softmax linear classifier trained with mini-batch SGD.

Weights are a C x (d+1) matrix, bias in the last column. Initialization is
zeros and shuffling comes from a seeded generator, so a (dataset, config)
pair always trains to bit-identical weights. Cross-entropy is convex in the
weights, which the gradient-ascent unlearning algorithm relies on: any
positive step along the gradient cannot decrease the forget-set loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .data import SynthDataset


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 64
    lr: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0.0:
            raise InvalidArgument("epochs >= 0, batch_size >= 1, lr > 0 required")


@dataclass(frozen=True)
class SimModel:
    weights: np.ndarray
    train_config: TrainConfig
    training_log: tuple[float, ...]

    def __post_init__(self) -> None:
        self.weights.setflags(write=False)

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[0])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class probabilities per row; rows sum to 1 within 1e-9."""
        logits = X @ self.weights[:, :-1].T + self.weights[:, -1]
        logits -= logits.max(axis=1, keepdims=True)
        exp = np.exp(logits)
        return exp / exp.sum(axis=1, keepdims=True)

    def confidence(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """True-label probability per row."""
        return self.predict_proba(X)[np.arange(len(y)), y]

    def accuracy(self, X: np.ndarray, y: np.ndarray) -> float:
        return float((self.predict_proba(X).argmax(axis=1) == y).mean())


def cross_entropy(model: SimModel, X: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood of the true labels."""
    probs = model.predict_proba(X)
    return float(-np.log(np.clip(probs[np.arange(len(y)), y], 1e-300, None)).mean())


def _batch_loss_and_grad(
    weights: np.ndarray, Xb: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    logits = Xb @ weights.T
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    rows = np.arange(len(y))
    loss = float(-np.log(np.clip(probs[rows, y], 1e-300, None)).mean())
    probs[rows, y] -= 1.0
    grad = probs.T @ Xb / len(y)
    return loss, grad


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((len(X), 1))])


def _sgd(
    weights: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    epochs: int,
    batch_size: int,
    lr: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, list[float]]:
    """Mini-batch SGD epochs over (X, y); returns weights and per-epoch loss."""
    Xb = _with_bias(X)
    weights = weights.copy()
    log: list[float] = []
    n = len(y)
    for _ in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            loss, grad = _batch_loss_and_grad(weights, Xb[batch], y[batch])
            weights -= lr * grad
            total += loss * len(batch)
        log.append(total / n)
    return weights, log


def train(
    dataset: SynthDataset, config: TrainConfig, indices: np.ndarray | None = None
) -> SimModel:
    """Train from zero-initialized weights on the train split (or a subset).

    indices, when given, must be dataset row indices; defaults to the full
    train split. Zero epochs returns the initialization unchanged.
    """
    if indices is None:
        indices = dataset.train_idx
    X = dataset.features[indices]
    y = dataset.labels[indices]
    weights = np.zeros((dataset.n_classes, dataset.dim + 1))
    rng = np.random.default_rng(config.seed)
    weights, log = _sgd(weights, X, y, config.epochs, config.batch_size, config.lr, rng)
    return SimModel(weights=weights, train_config=config, training_log=tuple(log))


def continue_training_xy(
    model: SimModel,
    X: np.ndarray,
    y: np.ndarray,
    epochs: int,
    lr: float,
    stream_tag: int,
) -> SimModel:
    """More SGD from a trained model's weights on arbitrary (X, y) rows.

    The shuffle generator is derived from the parent model's seed plus a
    fixed per-operation stream tag, so replays are deterministic without a
    new seed parameter.
    """
    if lr <= 0.0:
        raise InvalidArgument("lr must be positive")
    rng = np.random.default_rng([model.train_config.seed, stream_tag])
    weights, log = _sgd(model.weights, X, y, epochs, model.train_config.batch_size, lr, rng)
    return SimModel(
        weights=weights,
        train_config=model.train_config,
        training_log=model.training_log + tuple(log),
    )


def continue_training(
    model: SimModel,
    dataset: SynthDataset,
    indices: np.ndarray,
    epochs: int,
    lr: float,
    stream_tag: int,
) -> SimModel:
    """continue_training_xy on dataset rows with their true labels."""
    return continue_training_xy(
        model,
        dataset.features[indices],
        dataset.labels[indices],
        epochs,
        lr,
        stream_tag,
    )
