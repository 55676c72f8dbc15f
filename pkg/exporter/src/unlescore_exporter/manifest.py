"""Export manifest: which predictors to query, on which samples, writing where.

A manifest is a JSON document:

    {
      "original_predictor": "my_models:original",
      "unlearned_predictor": "my_models:unlearned",
      "output": "confidences.csv",
      "samples": {
        "nonmember":        [{"sample_id": "nm-0", "label": 2, "features": [...]}, ...],
        "unlearned_member": [...],
        "retained_member":  [...]
      }
    }

Predictor identifiers are "module:attr" import strings (dots allowed in the
attribute part); programmatic callers may pass callables directly. "features"
is passed to the predictor untouched, so it can be any JSON value the user's
model understands. "group_id" is optional per sample and flows straight into
the output column. Split lists must be disjoint by sample_id and the
nonmember list non-empty — it calibrates the downstream scorer's references.
"""

from __future__ import annotations

import importlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import ManifestError

# Split vocabulary of the confidence CSV, in output row order.
SPLITS = ("nonmember", "unlearned_member", "retained_member")

_MANIFEST_KEYS = {"original_predictor", "unlearned_predictor", "output", "samples"}
_SAMPLE_KEYS = {"sample_id", "label", "features", "group_id"}

# A predictor maps one sample's features to a probability vector over classes.
Predictor = Callable[[Any], Sequence[float]]


@dataclass(frozen=True, slots=True)
class SampleSpec:
    """One sample to query: identity, true label, and raw predictor input."""

    sample_id: str
    label: int
    features: Any
    group_id: int | None = None


@dataclass(frozen=True, slots=True)
class ExportManifest:
    predictor_ori: Predictor | str
    predictor_unl: Predictor | str
    output: Path
    nonmember: tuple[SampleSpec, ...]
    unlearned_member: tuple[SampleSpec, ...] = ()
    retained_member: tuple[SampleSpec, ...] = ()

    def __post_init__(self) -> None:
        if not self.nonmember:
            raise ManifestError("nonmember sample list must be non-empty")
        seen: dict[str, str] = {}
        for split in SPLITS:
            for spec in getattr(self, split):
                prior = seen.get(spec.sample_id)
                if prior == split:
                    raise ManifestError(f"duplicate sample_id {spec.sample_id!r} in {split}")
                if prior is not None:
                    raise ManifestError(
                        f"sample_id {spec.sample_id!r} appears in both {prior} and {split}"
                    )
                seen[spec.sample_id] = split

    def samples_by_split(self) -> tuple[tuple[str, tuple[SampleSpec, ...]], ...]:
        return tuple((split, getattr(self, split)) for split in SPLITS)

    def with_output(self, output: str | Path) -> "ExportManifest":
        return replace(self, output=Path(output))


def resolve_predictor(spec: Predictor | str, role: str) -> Predictor:
    """Turn a "module:attr" string into the callable it names.

    Callables pass through untouched. Anything unresolvable or non-callable is
    a manifest problem, reported with the role so the message says which of
    the two predictors is broken.
    """
    if callable(spec):
        return spec
    if not isinstance(spec, str) or ":" not in spec:
        raise ManifestError(f'{role} predictor must be callable or "module:attr", got {spec!r}')
    module_name, _, attr_path = spec.partition(":")
    try:
        target: Any = importlib.import_module(module_name)
    except ImportError as exc:
        raise ManifestError(f"{role} predictor: cannot import {module_name!r}: {exc}") from exc
    for attr in attr_path.split("."):
        try:
            target = getattr(target, attr)
        except AttributeError as exc:
            raise ManifestError(f"{role} predictor: {spec!r} does not resolve: {exc}") from exc
    if not callable(target):
        raise ManifestError(f"{role} predictor {spec!r} resolved to a non-callable")
    return target


def _sample_spec(obj: Any, split: str, index: int) -> SampleSpec:
    where = f"samples.{split}[{index}]"
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: expected an object")
    unknown = set(obj) - _SAMPLE_KEYS
    if unknown:
        raise ManifestError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = {"sample_id", "label", "features"} - set(obj)
    if missing:
        raise ManifestError(f"{where}: missing key(s) {sorted(missing)}")
    sample_id = obj["sample_id"]
    if not isinstance(sample_id, str) or not sample_id:
        raise ManifestError(f"{where}: sample_id must be a non-empty string")
    label = obj["label"]
    if isinstance(label, bool) or not isinstance(label, int) or label < 0:
        raise ManifestError(f"{where}: label must be a non-negative integer")
    group_id = obj.get("group_id")
    if group_id is not None and (isinstance(group_id, bool) or not isinstance(group_id, int)):
        raise ManifestError(f"{where}: group_id must be an integer or omitted")
    return SampleSpec(sample_id, label, obj["features"], group_id)


def manifest_from_dict(doc: Any) -> ExportManifest:
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    unknown = set(doc) - _MANIFEST_KEYS
    if unknown:
        raise ManifestError(f"unknown manifest key(s) {sorted(unknown)}")
    missing = _MANIFEST_KEYS - set(doc)
    if missing:
        raise ManifestError(f"missing manifest key(s) {sorted(missing)}")
    for key in ("original_predictor", "unlearned_predictor"):
        if not isinstance(doc[key], str):
            raise ManifestError(f"{key} must be a string (module:attr)")
    if not isinstance(doc["output"], str) or not doc["output"]:
        raise ManifestError("output must be a non-empty path string")
    samples = doc["samples"]
    if not isinstance(samples, dict):
        raise ManifestError("samples must be an object keyed by split")
    unknown = set(samples) - set(SPLITS)
    if unknown:
        raise ManifestError(f"unknown split(s) {sorted(unknown)}; expected {list(SPLITS)}")
    parsed: dict[str, tuple[SampleSpec, ...]] = {}
    for split in SPLITS:
        entries = samples.get(split, [])
        if not isinstance(entries, list):
            raise ManifestError(f"samples.{split} must be a list")
        parsed[split] = tuple(_sample_spec(e, split, i) for i, e in enumerate(entries))
    return ExportManifest(
        predictor_ori=doc["original_predictor"],
        predictor_unl=doc["unlearned_predictor"],
        output=Path(doc["output"]),
        **parsed,
    )


def load_manifest(path: str | Path) -> ExportManifest:
    """Read and validate a manifest file. JSON syntax errors pass through as
    json.JSONDecodeError so callers can distinguish parse from validation."""
    text = Path(path).read_text(encoding="utf-8")
    return manifest_from_dict(json.loads(text))
