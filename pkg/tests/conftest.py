"""Shared builders for confidence records used across the test modules."""

from __future__ import annotations

import numpy as np
import pytest

from unlescore.records import ConfidenceRecord, SplitLabel


def make_record(
    sample_id: str,
    conf_ori: float,
    conf_unl: float,
    split: SplitLabel = SplitLabel.NONMEMBER,
    label: int = 0,
    group_id: int | None = None,
) -> ConfidenceRecord:
    return ConfidenceRecord(
        sample_id=sample_id,
        label=label,
        conf_ori=conf_ori,
        conf_unl=conf_unl,
        split=split,
        group_id=group_id,
    )


def random_records(
    rng: np.random.Generator,
    n_nonmember: int = 60,
    n_unlearned: int = 25,
    n_retained: int = 25,
) -> list[ConfidenceRecord]:
    """Seeded record set with all three splits and confidences in (0, 1)."""
    records: list[ConfidenceRecord] = []
    blocks = (
        ("nm", SplitLabel.NONMEMBER, n_nonmember),
        ("ul", SplitLabel.UNLEARNED_MEMBER, n_unlearned),
        ("rt", SplitLabel.RETAINED_MEMBER, n_retained),
    )
    for prefix, split, count in blocks:
        confs = rng.uniform(0.01, 0.99, size=(count, 2))
        for i in range(count):
            records.append(
                make_record(
                    f"{prefix}-{i:04d}",
                    float(confs[i, 0]),
                    float(confs[i, 1]),
                    split=split,
                    label=int(rng.integers(0, 3)),
                    group_id=int(rng.integers(0, 3)),
                )
            )
    return records


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
