"""Query both predictors per sample and write the scorer's confidence CSV.

The output format is fixed by the scoring engine's reader: header
sample_id,label,split,conf_ori,conf_unl,group_id, floats rendered as
9-significant-digit shortest text, "\n" line endings, UTF-8, group_id blank
when absent. format_float below intentionally mirrors the engine's
canonicalization — this adapter stays dependency-free, so the contract is
duplicated here and pinned by golden-byte tests rather than imported.

Rows come out grouped by split (nonmember, unlearned_member, retained_member)
preserving manifest order inside each split, so a given manifest always
produces identical bytes.
"""

from __future__ import annotations

import csv
import io
import math
from numbers import Real
from pathlib import Path

from .errors import ManifestError, PredictorError
from .manifest import ExportManifest, Predictor, SampleSpec, resolve_predictor

CSV_COLUMNS = ("sample_id", "label", "split", "conf_ori", "conf_unl", "group_id")

# Probability vectors may miss unit sum by at most this much (softmax round-off).
SUM_TOLERANCE = 1e-4


def format_float(x: float) -> str:
    """Canonical 9-significant-digit text for a float; 'inf' for infinity."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(float(x), ".9g")


def _true_label_conf(
    predictor: Predictor, role: str, spec: SampleSpec, n_classes: int | None
) -> tuple[float, int]:
    """One predictor query, fully checked: returns (confidence, class count).

    Every failure mode names the sample and the predictor role so a bad model
    can be reproduced with a single call.
    """
    try:
        probs = list(predictor(spec.features))
    except Exception as exc:  # noqa: BLE001 - user code; surface, don't mask
        raise PredictorError(role, spec.sample_id, exc) from exc
    where = f"{role} predictor on sample {spec.sample_id!r}"
    if not probs:
        raise ManifestError(f"{where}: empty probability vector")
    values = []
    for p in probs:
        if isinstance(p, bool) or not isinstance(p, Real) or not math.isfinite(p):
            raise ManifestError(f"{where}: non-numeric probability {p!r}")
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ManifestError(f"{where}: probability {p!r} outside [0, 1]")
        values.append(p)
    if n_classes is not None and len(values) != n_classes:
        raise ManifestError(
            f"{where}: got {len(values)} classes, expected {n_classes} "
            "(all queries must agree on the class count)"
        )
    total = sum(values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ManifestError(f"{where}: probabilities sum to {total!r}, not 1")
    if spec.label >= len(values):
        raise ManifestError(
            f"{where}: label {spec.label} out of range for {len(values)} classes"
        )
    return values[spec.label], len(values)


def export_bytes(manifest: ExportManifest) -> bytes:
    """Render the confidence CSV for a manifest without touching the filesystem."""
    predictor_ori = resolve_predictor(manifest.predictor_ori, "original")
    predictor_unl = resolve_predictor(manifest.predictor_unl, "unlearned")
    n_classes: int | None = None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for split, specs in manifest.samples_by_split():
        for spec in specs:
            conf_ori, n_classes = _true_label_conf(predictor_ori, "original", spec, n_classes)
            conf_unl, n_classes = _true_label_conf(predictor_unl, "unlearned", spec, n_classes)
            writer.writerow(
                (
                    spec.sample_id,
                    str(spec.label),
                    split,
                    format_float(conf_ori),
                    format_float(conf_unl),
                    "" if spec.group_id is None else str(spec.group_id),
                )
            )
    return buf.getvalue().encode("utf-8")


def export(manifest: ExportManifest) -> Path:
    """Query both predictors on every sample and write manifest.output.

    Returns the written path. All validation happens before the first byte is
    written, so a failed export never leaves a truncated file behind.
    """
    payload = export_bytes(manifest)
    out = Path(manifest.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(payload)
    return out
