"""Synthetic Gaussian-blob datasets with disjoint train/test/nonmember splits.

Class means sit on scaled one-hot axes when the class count fits the
dimension (pairwise-equidistant, so no class is geometrically privileged);
otherwise they are seeded random directions of the same norm. Unit-variance
isotropic noise throughout, so `separation` alone controls difficulty.

The nonmember split is drawn from the same distribution and never trained
on; it is the reference population the scoring engine fits against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument


@dataclass(frozen=True)
class SynthDataset:
    features: np.ndarray
    labels: np.ndarray
    seed: int
    separation: float
    class_means: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    nonmember_idx: np.ndarray

    def __post_init__(self) -> None:
        for arr in (
            self.features,
            self.labels,
            self.class_means,
            self.train_idx,
            self.test_idx,
            self.nonmember_idx,
        ):
            arr.setflags(write=False)

    @property
    def n_classes(self) -> int:
        return int(self.class_means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.class_means.shape[1])


def generate_blobs(
    n_classes: int,
    dim: int,
    n_per_class: int,
    separation: float,
    seed: int,
    n_test_per_class: int | None = None,
    n_nonmember_per_class: int | None = None,
    class_means: np.ndarray | None = None,
) -> SynthDataset:
    """Deterministically sample per-class Gaussian clusters and split them.

    n_per_class is the TRAIN count per class; test and nonmember splits
    default to a third of it each. All three splits are disjoint rows of one
    feature matrix, laid out class by class. class_means, when given,
    replaces the default placement (one class per axis at `separation`, or
    seeded unit directions when classes outnumber dimensions) — e.g. to study
    deliberately overlapping classes.
    """
    if n_classes < 2 or dim < 2:
        raise InvalidArgument("need at least 2 classes and 2 dimensions")
    if n_per_class < 20:
        raise InvalidArgument("need at least 20 training samples per class")
    if n_test_per_class is None:
        n_test_per_class = max(n_per_class // 3, 10)
    if n_nonmember_per_class is None:
        n_nonmember_per_class = max(n_per_class // 3, 10)

    rng = np.random.default_rng(seed)
    if class_means is not None:
        means = np.asarray(class_means, dtype=float)
        if means.shape != (n_classes, dim):
            raise InvalidArgument(
                f"class_means must have shape {(n_classes, dim)}, got {means.shape}"
            )
        means = means.copy()
    elif n_classes <= dim:
        means = np.zeros((n_classes, dim))
        means[np.arange(n_classes), np.arange(n_classes)] = separation
    else:
        directions = rng.standard_normal((n_classes, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        means = directions * separation

    per_class = n_per_class + n_test_per_class + n_nonmember_per_class
    features = np.empty((n_classes * per_class, dim))
    labels = np.empty(n_classes * per_class, dtype=np.int64)
    train_parts, test_parts, nm_parts = [], [], []
    for c in range(n_classes):
        base = c * per_class
        features[base : base + per_class] = means[c] + rng.standard_normal((per_class, dim))
        labels[base : base + per_class] = c
        train_parts.append(np.arange(base, base + n_per_class))
        test_parts.append(np.arange(base + n_per_class, base + n_per_class + n_test_per_class))
        nm_parts.append(np.arange(base + n_per_class + n_test_per_class, base + per_class))
    return SynthDataset(
        features=features,
        labels=labels,
        seed=seed,
        separation=separation,
        class_means=means,
        train_idx=np.concatenate(train_parts),
        test_idx=np.concatenate(test_parts),
        nonmember_idx=np.concatenate(nm_parts),
    )
