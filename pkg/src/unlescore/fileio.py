"""Bit-exact file formats and run reports.

Input formats
-------------
Confidence CSV, fixed header ``sample_id,label,split,conf_ori,conf_unl,group_id``
with split drawn from {retained_member, unlearned_member, nonmember} and
group_id empty for ungrouped records. Strict: UTF-8 only, header required,
unknown or missing columns rejected with the line number.

Shadow JSONL, one object per line: {"sample_id": ..., "shadow_confs": [...]}.

Output formats
--------------
``json``       full EvalReport (sorted keys, schema_version, indent 2);
``csv_scores`` one row per ScoreVector;
``roc_tsv``    threshold/fpr/tpr triples for external plotting.

Every writer is deterministic byte-for-byte for a given payload: floats are
serialized with 9 significant digits (idempotent under re-rounding, so
read-then-write reproduces a written file exactly), keys are sorted, and the
+infinity ROC sentinel is written as the JSON string "Infinity" (strict JSON
has no infinity literal) and as "inf" in TSV. Each format reads back into the
payload it carries: the JSON reader reconstructs the full EvalReport, the
csv_scores reader yields the ScoreVectors, and the roc_tsv reader yields the
threshold/fpr/tpr arrays (the sample counts are not part of that format).

The JSON report embeds the scored input records next to the per-sample
scores, so every summary number (AUC, TPR@FPR, split means, anomaly verdict)
is recomputable from the report alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .anomaly import AnomalyReport, Verdict
from .errors import InvalidArgument, ParseError
from .numstats import RocCurve
from .records import ConfidenceRecord, ScoreVector, ShadowRecord, SplitLabel

SCHEMA_VERSION = 1
CSV_COLUMNS = ("sample_id", "label", "split", "conf_ori", "conf_unl", "group_id")
SCORE_CSV_COLUMNS = (
    "sample_id",
    "h_ori",
    "h_unl",
    "l_diff",
    "d_a_lik",
    "d_b_lik",
    "d_liks",
    "unle_score",
    "lira_nmi",
    "update_diff",
    "update_ratio",
)
REPORT_FORMATS = ("json", "csv_scores", "roc_tsv")


@dataclass(frozen=True, slots=True)
class EvalReport:
    """One run's complete output: inputs, scores, summaries, verdicts.

    metadata always carries the tool version, the RunConfig echo, the seed,
    the timestamp (None unless explicitly stamped, to keep repeated runs
    byte-identical), and the achieved-FPR granularity note. timing is None
    for deterministic bench reports and holds fit/score/eval wall-clock
    seconds on the scoring path.
    """

    metadata: dict
    records: tuple[ConfidenceRecord, ...]
    scores: tuple[ScoreVector, ...]
    summary: dict
    roc: RocCurve | None = None
    anomaly: AnomalyReport | None = None
    timing: dict | None = None


def format_float(x: float) -> str:
    """Canonical 9-significant-digit text for a float; 'inf' for infinity."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(float(x), ".9g")


def _round9(x: float) -> float:
    if math.isinf(x):
        return x
    return float(format_float(x))


def _json_ready(obj):
    """Round floats to the serialized precision and map infinities to strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        return _round9(obj)
    if isinstance(obj, dict):
        return {str(key): _json_ready(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(item) for item in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return _json_ready(obj.item())
    raise InvalidArgument(f"cannot serialize {type(obj).__name__} into a report")


def _json_float(value, context: str) -> float:
    if value == "Infinity":
        return math.inf
    if value == "-Infinity":
        return -math.inf
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ParseError(f"expected a number for {context}")


# ---------------------------------------------------------------------------
# Confidence CSV

def write_confidence_file(records: Iterable[ConfidenceRecord], path: str | Path) -> None:
    Path(path).write_bytes(confidence_csv_bytes(records))


def confidence_csv_bytes(records: Iterable[ConfidenceRecord]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(
            (
                rec.sample_id,
                str(rec.label),
                rec.split.value,
                format_float(rec.conf_ori),
                format_float(rec.conf_unl),
                "" if rec.group_id is None else str(rec.group_id),
            )
        )
    return buf.getvalue().encode("utf-8")


def read_confidence_file(path: str | Path) -> list[ConfidenceRecord]:
    """Parse the strict confidence CSV; structural problems raise ParseError.

    Out-of-range values parse fine and are left to validate_record_set, so a
    caller can report every violation instead of stopping at the first.
    """
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None
    split_by_value = {label.value: label for label in SplitLabel}
    records: list[ConfidenceRecord] = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ParseError(
            f"expected header {','.join(CSV_COLUMNS)!r}, got {header!r}", line=1
        )
    for row in reader:
        line = reader.line_num
        if not row:
            raise ParseError("blank line", line=line)
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"expected {len(CSV_COLUMNS)} fields, got {len(row)}", line=line)
        sample_id, label_text, split_text, ori_text, unl_text, group_text = row
        try:
            label = int(label_text)
        except ValueError:
            raise ParseError(f"label is not an integer: {label_text!r}", line=line) from None
        split = split_by_value.get(split_text)
        if split is None:
            raise ParseError(f"unknown split: {split_text!r}", line=line)
        try:
            conf_ori = float(ori_text)
            conf_unl = float(unl_text)
        except ValueError as exc:
            raise ParseError(f"bad confidence value: {exc}", line=line) from None
        if group_text == "":
            group_id: int | None = None
        else:
            try:
                group_id = int(group_text)
            except ValueError:
                raise ParseError(f"group_id is not an integer: {group_text!r}", line=line) from None
        records.append(
            ConfidenceRecord(
                sample_id=sample_id,
                label=label,
                conf_ori=conf_ori,
                conf_unl=conf_unl,
                split=split,
                group_id=group_id,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Shadow JSONL

def read_shadow_file(path: str | Path) -> list[ShadowRecord]:
    """Parse shadow confidences; length/degeneracy checks happen downstream."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None
    records: list[ShadowRecord] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip() == "":
            raise ParseError("blank line", line=line_no)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from None
        if not isinstance(obj, dict) or set(obj) != {"sample_id", "shadow_confs"}:
            raise ParseError(
                'expected an object with exactly "sample_id" and "shadow_confs"', line=line_no
            )
        sample_id = obj["sample_id"]
        confs = obj["shadow_confs"]
        if not isinstance(sample_id, str):
            raise ParseError("sample_id must be a string", line=line_no)
        if not isinstance(confs, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in confs
        ):
            raise ParseError("shadow_confs must be a list of numbers", line=line_no)
        records.append(ShadowRecord(sample_id=sample_id, shadow_confs=tuple(float(v) for v in confs)))
    return records


# ---------------------------------------------------------------------------
# Report serialization

def _score_to_dict(sv: ScoreVector) -> dict:
    return {
        "sample_id": sv.sample_id,
        "h_ori": sv.h_ori,
        "h_unl": sv.h_unl,
        "l_diff": sv.l_diff,
        "d_a_lik": sv.d_a_lik,
        "d_b_lik": sv.d_b_lik,
        "d_liks": sv.d_liks,
        "unle_score": sv.unle_score,
        "lira_nmi": sv.lira_nmi,
        "update_diff": sv.update_diff,
        "update_ratio": sv.update_ratio,
    }


def _record_to_dict(rec: ConfidenceRecord) -> dict:
    return {
        "sample_id": rec.sample_id,
        "label": rec.label,
        "split": rec.split.value,
        "conf_ori": rec.conf_ori,
        "conf_unl": rec.conf_unl,
        "group_id": rec.group_id,
    }


def _roc_to_dict(roc: RocCurve) -> dict:
    return {
        "thresholds": roc.thresholds,
        "fpr": roc.fpr,
        "tpr": roc.tpr,
        "positive_count": roc.positive_count,
        "negative_count": roc.negative_count,
    }


def _anomaly_to_dict(report: AnomalyReport) -> dict:
    return {
        "under_unlearned": [[sid, score] for sid, score in report.under_unlearned],
        "over_unlearned": [[sid, z] for sid, z in report.over_unlearned],
        "retained_peak_ratio": report.retained_peak_ratio,
        "verdict": report.verdict.value,
        "tau_u": report.tau_u,
        "robust_k": report.robust_k,
        "peak_ratio_min": report.peak_ratio_min,
    }


def report_to_json_bytes(report: EvalReport) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "metadata": report.metadata,
        "records": [_record_to_dict(rec) for rec in report.records],
        "scores": [_score_to_dict(sv) for sv in report.scores],
        "summary": report.summary,
        "roc": None if report.roc is None else _roc_to_dict(report.roc),
        "anomaly": None if report.anomaly is None else _anomaly_to_dict(report.anomaly),
        "timing": report.timing,
    }
    text = json.dumps(_json_ready(doc), sort_keys=True, indent=2, allow_nan=False)
    return (text + "\n").encode("utf-8")


def scores_csv_bytes(scores: Sequence[ScoreVector]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCORE_CSV_COLUMNS)
    for sv in scores:
        writer.writerow(
            (
                sv.sample_id,
                format_float(sv.h_ori),
                format_float(sv.h_unl),
                format_float(sv.l_diff),
                format_float(sv.d_a_lik),
                format_float(sv.d_b_lik),
                format_float(sv.d_liks),
                format_float(sv.unle_score),
                "" if sv.lira_nmi is None else format_float(sv.lira_nmi),
                "" if sv.update_diff is None else format_float(sv.update_diff),
                "" if sv.update_ratio is None else format_float(sv.update_ratio),
            )
        )
    return buf.getvalue().encode("utf-8")


def roc_tsv_bytes(roc: RocCurve) -> bytes:
    lines = ["threshold\tfpr\ttpr"]
    for i in range(len(roc.thresholds)):
        lines.append(
            f"{format_float(float(roc.thresholds[i]))}\t"
            f"{format_float(float(roc.fpr[i]))}\t"
            f"{format_float(float(roc.tpr[i]))}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def report_bytes(report: EvalReport, fmt: str) -> bytes:
    if fmt == "json":
        return report_to_json_bytes(report)
    if fmt == "csv_scores":
        return scores_csv_bytes(report.scores)
    if fmt == "roc_tsv":
        if report.roc is None:
            raise InvalidArgument("report has no ROC curve; roc_tsv needs an evaluation")
        return roc_tsv_bytes(report.roc)
    raise InvalidArgument(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")


def write_report(report: EvalReport, path: str | Path, fmt: str = "json") -> None:
    data = report_bytes(report, fmt)
    Path(path).write_bytes(data)


def json_doc_bytes(doc: dict) -> bytes:
    """Deterministic JSON bytes for auxiliary documents (same float policy)."""
    text = json.dumps(_json_ready(doc), sort_keys=True, indent=2, allow_nan=False)
    return (text + "\n").encode("utf-8")


def write_json_doc(doc: dict, path: str | Path) -> None:
    Path(path).write_bytes(json_doc_bytes(doc))


# ---------------------------------------------------------------------------
# Report readers (round-trip support)

def _score_from_dict(obj: dict) -> ScoreVector:
    def opt(name: str) -> float | None:
        value = obj.get(name)
        return None if value is None else _json_float(value, name)

    return ScoreVector(
        sample_id=obj["sample_id"],
        h_ori=_json_float(obj["h_ori"], "h_ori"),
        h_unl=_json_float(obj["h_unl"], "h_unl"),
        l_diff=_json_float(obj["l_diff"], "l_diff"),
        d_a_lik=_json_float(obj["d_a_lik"], "d_a_lik"),
        d_b_lik=_json_float(obj["d_b_lik"], "d_b_lik"),
        d_liks=_json_float(obj["d_liks"], "d_liks"),
        unle_score=_json_float(obj["unle_score"], "unle_score"),
        lira_nmi=opt("lira_nmi"),
        update_diff=opt("update_diff"),
        update_ratio=opt("update_ratio"),
    )


def _record_from_dict(obj: dict) -> ConfidenceRecord:
    return ConfidenceRecord(
        sample_id=obj["sample_id"],
        label=int(obj["label"]),
        conf_ori=_json_float(obj["conf_ori"], "conf_ori"),
        conf_unl=_json_float(obj["conf_unl"], "conf_unl"),
        split=SplitLabel(obj["split"]),
        group_id=None if obj.get("group_id") is None else int(obj["group_id"]),
    )


def read_report(path: str | Path) -> EvalReport:
    """Reconstruct an EvalReport from its JSON form."""
    try:
        doc = json.loads(Path(path).read_bytes().decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid report JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported report schema: {doc.get('schema_version')!r}")
    roc = None
    if doc.get("roc") is not None:
        robj = doc["roc"]
        roc = RocCurve(
            thresholds=np.array([_json_float(v, "threshold") for v in robj["thresholds"]]),
            fpr=np.array([_json_float(v, "fpr") for v in robj["fpr"]]),
            tpr=np.array([_json_float(v, "tpr") for v in robj["tpr"]]),
            positive_count=int(robj["positive_count"]),
            negative_count=int(robj["negative_count"]),
        )
    anomaly = None
    if doc.get("anomaly") is not None:
        aobj = doc["anomaly"]
        anomaly = AnomalyReport(
            under_unlearned=tuple((sid, _json_float(score, "score")) for sid, score in aobj["under_unlearned"]),
            over_unlearned=tuple((sid, _json_float(z, "z")) for sid, z in aobj["over_unlearned"]),
            retained_peak_ratio=_json_float(aobj["retained_peak_ratio"], "retained_peak_ratio"),
            verdict=Verdict(aobj["verdict"]),
            tau_u=_json_float(aobj["tau_u"], "tau_u"),
            robust_k=_json_float(aobj["robust_k"], "robust_k"),
            peak_ratio_min=_json_float(aobj["peak_ratio_min"], "peak_ratio_min"),
        )
    return EvalReport(
        metadata=doc["metadata"],
        records=tuple(_record_from_dict(obj) for obj in doc["records"]),
        scores=tuple(_score_from_dict(obj) for obj in doc["scores"]),
        summary=doc["summary"],
        roc=roc,
        anomaly=anomaly,
        timing=doc.get("timing"),
    )


def read_scores_csv(path: str | Path) -> list[ScoreVector]:
    """Read back a csv_scores file into ScoreVectors."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != SCORE_CSV_COLUMNS:
        raise ParseError(f"expected header {','.join(SCORE_CSV_COLUMNS)!r}", line=1)
    out: list[ScoreVector] = []
    for row in reader:
        line = reader.line_num
        if len(row) != len(SCORE_CSV_COLUMNS):
            raise ParseError(f"expected {len(SCORE_CSV_COLUMNS)} fields, got {len(row)}", line=line)
        try:
            values = [float(v) for v in row[1:8]]
            optional = [None if v == "" else float(v) for v in row[8:]]
        except ValueError as exc:
            raise ParseError(f"bad score value: {exc}", line=line) from None
        out.append(ScoreVector(row[0], *values, *optional))
    return out


def read_roc_tsv(path: str | Path) -> dict[str, np.ndarray]:
    """Read back a roc_tsv file into its threshold/fpr/tpr arrays."""
    text = Path(path).read_bytes().decode("utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != "threshold\tfpr\ttpr":
        raise ParseError("expected header 'threshold\\tfpr\\ttpr'", line=1)
    cols: dict[str, list[float]] = {"threshold": [], "fpr": [], "tpr": []}
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", line=line_no)
        try:
            cols["threshold"].append(float(parts[0]))
            cols["fpr"].append(float(parts[1]))
            cols["tpr"].append(float(parts[2]))
        except ValueError as exc:
            raise ParseError(f"bad value: {exc}", line=line_no) from None
    return {name: np.array(values) for name, values in cols.items()}
