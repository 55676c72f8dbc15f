"""Shared manifest builders for the exporter tests."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent


def sample(sample_id: str, label: int, features, group_id=None) -> dict:
    doc = {"sample_id": sample_id, "label": label, "features": features}
    if group_id is not None:
        doc["group_id"] = group_id
    return doc


def manifest_doc(output: str, n_nonmember=5, n_unlearned=3, n_retained=3) -> dict:
    """A small well-formed manifest over the toy 3-class softmax pair."""
    rng = random.Random(20240817)
    features = lambda: [rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)]
    return {
        "original_predictor": "toy_predictors:original",
        "unlearned_predictor": "toy_predictors:unlearned",
        "output": output,
        "samples": {
            "nonmember": [
                sample(f"nm-{i:03d}", i % 3, features()) for i in range(n_nonmember)
            ],
            "unlearned_member": [
                sample(f"ul-{i:03d}", i % 3, features(), group_id=i % 3)
                for i in range(n_unlearned)
            ],
            "retained_member": [
                sample(f"rt-{i:03d}", i % 3, features(), group_id=i % 3)
                for i in range(n_retained)
            ],
        },
    }


@pytest.fixture
def write_manifest(tmp_path):
    def _write(doc: dict, name: str = "manifest.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
        return path

    return _write
