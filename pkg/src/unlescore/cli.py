"""Operator command line.

Subcommands: score (fit references + per-sample scores), evaluate (adds the
ground-truth ROC requirements and optional shadow baselines), detect (anomaly
verdict with alarm exit code), bench (named experiment presets).

Exit codes are a stable contract: 0 ok, 2 validation failure, 3 parse
failure, 4 anomaly alarm, 1 internal error. Diagnostics go to stderr; report
data goes to --output or stdout, so pipes stay clean.

Every run's effective configuration is echoed into its report metadata;
re-running with --config pointed at that echo reproduces the outputs
byte-for-byte (enable --no-timing on score/evaluate, since wall-clock timing
is the one non-deterministic report section; --stamp likewise opts into a
timestamp).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .anomaly import DEFAULT_PEAK_RATIO_MIN, DEFAULT_ROBUST_K, DEFAULT_TAU_U
from .errors import DegenerateSample, InvalidArgument, ParseError
from .fileio import (
    REPORT_FORMATS,
    json_doc_bytes,
    read_confidence_file,
    read_shadow_file,
    report_bytes,
)
from .pipeline import DEFAULT_FPR_TARGETS, run_scoring
from .records import SplitLabel, validate_record_set
from .simbench.experiments import ALGORITHMS, PRESETS, get_preset, run_preset


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Effective settings of one CLI invocation; every field has a default.

    Precedence: built-in defaults < --config file entries < explicit flags.
    The full dataclass is echoed into report metadata under "config".
    """

    command: str
    input: str | None = None
    shadow: str | None = None
    output: str | None = None
    format: str = "json"
    fpr_targets: tuple[float, ...] = DEFAULT_FPR_TARGETS
    tau_u: float = DEFAULT_TAU_U
    robust_k: float = DEFAULT_ROBUST_K
    peak_ratio_min: float = DEFAULT_PEAK_RATIO_MIN
    preset: str | None = None
    algorithm: str = "exact_retrain"
    seed: int | None = None
    stamp: bool = False
    no_timing: bool = False

    def echo(self) -> dict:
        return dataclasses.asdict(self)


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unlescore",
        description="Score unlearning completeness from black-box confidences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, data: bool) -> None:
        p.add_argument("--config", default=None, metavar="FILE",
                       help="JSON file of RunConfig fields; flags override it")
        p.add_argument("--output", default=None, metavar="PATH",
                       help="output file (score/evaluate/detect; default stdout) "
                            "or directory (bench; default bench_<preset>)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed recorded in metadata; overrides bench preset seed")
        if data:
            p.add_argument("--input", default=None, metavar="CSV",
                           help="confidence records (sample_id,label,split,"
                                "conf_ori,conf_unl,group_id)")
            p.add_argument("--format", default=None, choices=sorted(REPORT_FORMATS),
                           help="report format (default json)")
            p.add_argument("--fpr", action="append", type=float, default=None,
                           metavar="TARGET", help="FPR target; repeatable (default 1e-3)")
            p.add_argument("--stamp", action="store_const", const=True, default=None,
                           help="add a UTC timestamp to report metadata "
                                "(off by default: timestamps break replay)")
            p.add_argument("--no-timing", action="store_const", const=True,
                           default=None, dest="no_timing",
                           help="omit the wall-clock timing section for "
                                "byte-identical replays")

    p_score = sub.add_parser("score", help="fit references and score every record")
    add_common(p_score, data=True)
    p_score.add_argument("--shadow", default=None, metavar="JSONL",
                         help="per-sample shadow confidences for baseline columns")

    p_eval = sub.add_parser(
        "evaluate", help="score plus ROC evaluation (needs both member splits)"
    )
    add_common(p_eval, data=True)
    p_eval.add_argument("--shadow", default=None, metavar="JSONL",
                        help="per-sample shadow confidences for baseline columns")

    p_detect = sub.add_parser(
        "detect", help="anomaly detection; exits 4 when the verdict is not clean"
    )
    add_common(p_detect, data=True)
    p_detect.add_argument("--tau-u", type=float, default=None, dest="tau_u",
                          help="under-unlearning threshold on UnleScore (default 0.5)")
    p_detect.add_argument("--robust-k", type=float, default=None, dest="robust_k",
                          help="robust-z cutoff for retained deviations (default 3.5)")
    p_detect.add_argument("--peak-ratio-min", type=float, default=None,
                          dest="peak_ratio_min",
                          help="minimum retained-histogram peak mass (default 0.5)")

    p_bench = sub.add_parser("bench", help="run a named experiment preset")
    add_common(p_bench, data=False)
    p_bench.add_argument("--preset", default=None, choices=sorted(PRESETS),
                         help="experiment preset name")
    p_bench.add_argument("--algorithm", default=None, choices=sorted(ALGORITHMS),
                         help="unlearning algorithm where applicable "
                              "(default exact_retrain)")
    p_bench.add_argument("--fpr", action="append", type=float, default=None,
                         metavar="TARGET", help="FPR target override; repeatable")
    p_bench.add_argument("--tau-u", type=float, default=None, dest="tau_u",
                         help="override the preset's under-unlearning threshold")
    p_bench.add_argument("--robust-k", type=float, default=None, dest="robust_k",
                         help="override the preset's robust-z cutoff")
    p_bench.add_argument("--peak-ratio-min", type=float, default=None,
                         dest="peak_ratio_min",
                         help="override the preset's histogram peak minimum")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidArgument(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(doc) - _CONFIG_FIELDS)
    if unknown:
        raise InvalidArgument(f"unknown config fields: {', '.join(unknown)}")
    return doc


def _merge_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {"command": args.command}
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        file_cfg.pop("command", None)
        merged.update(file_cfg)
    flag_names = _CONFIG_FIELDS - {"command", "fpr_targets"}
    for name in flag_names:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    if getattr(args, "fpr", None) is not None:
        merged["fpr_targets"] = args.fpr
    if "fpr_targets" in merged:
        merged["fpr_targets"] = tuple(float(t) for t in merged["fpr_targets"])
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise InvalidArgument(f"bad configuration: {exc}") from exc


def _timestamp(cfg: RunConfig) -> str | None:
    if not cfg.stamp:
        return None
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _read_validated_records(cfg: RunConfig):
    if not cfg.input:
        raise InvalidArgument("--input is required for this command")
    try:
        records = read_confidence_file(cfg.input)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {cfg.input}: {exc}") from exc
    result = validate_record_set(records)
    if not result.ok:
        for violation in result.violations:
            where = violation.sample_id or "<record set>"
            print(f"validation: {where}: {violation.reason}", file=sys.stderr)
        raise InvalidArgument(
            f"{cfg.input}: {len(result.violations)} validation violation(s)"
        )
    return records


def _read_shadows(cfg: RunConfig):
    if not cfg.shadow:
        return None
    try:
        return read_shadow_file(cfg.shadow)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {cfg.shadow}: {exc}") from exc


def _emit(data: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(data)
        print(f"wrote {output}", file=sys.stderr)
    else:
        sys.stdout.buffer.write(data)


def cmd_score(cfg: RunConfig) -> int:
    """Fit nonmember references, score every record, write the report."""
    records = _read_validated_records(cfg)
    report = run_scoring(
        records,
        shadows=_read_shadows(cfg),
        fpr_targets=cfg.fpr_targets,
        config_echo=cfg.echo(),
        seed=cfg.seed,
        timestamp=_timestamp(cfg),
        include_timing=not cfg.no_timing,
    )
    _emit(report_bytes(report, cfg.format), cfg.output)
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    """cmd_score plus the requirement that a ground-truth ROC exists."""
    records = _read_validated_records(cfg)
    counts = {label: 0 for label in SplitLabel}
    for rec in records:
        counts[rec.split] += 1
    missing = [
        label.value
        for label in (SplitLabel.RETAINED_MEMBER, SplitLabel.UNLEARNED_MEMBER)
        if counts[label] == 0
    ]
    if missing:
        raise InvalidArgument(
            f"evaluation needs both member splits; missing: {', '.join(missing)}"
        )
    report = run_scoring(
        records,
        shadows=_read_shadows(cfg),
        fpr_targets=cfg.fpr_targets,
        config_echo=cfg.echo(),
        seed=cfg.seed,
        timestamp=_timestamp(cfg),
        include_timing=not cfg.no_timing,
    )
    evaluation = report.summary["evaluation"]
    headline = ", ".join(
        [f"auc={evaluation['auc']:.6g}"]
        + [
            f"tpr@{entry['target_fpr']:g}={entry['tpr']:.6g}"
            for entry in evaluation["tpr_at_fpr"]
        ]
    )
    print(headline, file=sys.stderr)
    _emit(report_bytes(report, cfg.format), cfg.output)
    return 0


def cmd_detect(cfg: RunConfig) -> int:
    """Score, run both anomaly detectors, and alarm via the exit code."""
    records = _read_validated_records(cfg)
    report = run_scoring(
        records,
        fpr_targets=cfg.fpr_targets,
        config_echo=cfg.echo(),
        seed=cfg.seed,
        detect=True,
        tau_u=cfg.tau_u,
        robust_k=cfg.robust_k,
        peak_ratio_min=cfg.peak_ratio_min,
        timestamp=_timestamp(cfg),
        include_timing=not cfg.no_timing,
    )
    anomaly = report.anomaly
    assert anomaly is not None
    _emit(report_bytes(report, cfg.format), cfg.output)
    verdict = anomaly.verdict.value
    print(
        f"verdict={verdict} under_flags={len(anomaly.under_unlearned)} "
        f"over_flags={len(anomaly.over_unlearned)} "
        f"peak_ratio={anomaly.retained_peak_ratio:.4g}",
        file=sys.stderr,
    )
    return 0 if verdict == "clean" else 4


def cmd_bench(cfg: RunConfig) -> int:
    """Run a preset end to end and write its artifact tree."""
    if not cfg.preset:
        raise InvalidArgument(f"--preset is required; choose from {sorted(PRESETS)}")
    bench_cfg = get_preset(cfg.preset)
    overrides: dict = {}
    if cfg.seed is not None:
        overrides["seed"] = cfg.seed
    parser_defaults = RunConfig(command="bench")
    for name in ("fpr_targets", "tau_u", "robust_k", "peak_ratio_min"):
        value = getattr(cfg, name)
        if value != getattr(parser_defaults, name):
            overrides["fpr_targets" if name == "fpr_targets" else name] = value
    if overrides:
        bench_cfg = bench_cfg.replace(**overrides)
    artifacts = run_preset(bench_cfg, algorithm=cfg.algorithm)
    out_dir = Path(cfg.output) if cfg.output else Path(f"bench_{cfg.preset}")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.json").write_bytes(json_doc_bytes(cfg.echo()))
    for key, artifact in artifacts.items():
        path = out_dir / f"{key}.json"
        if isinstance(artifact, dict):
            path.write_bytes(json_doc_bytes(artifact))
        else:
            path.write_bytes(report_bytes(artifact, "json"))
    print(f"wrote {len(artifacts) + 1} file(s) under {out_dir}", file=sys.stderr)
    return 0


_COMMANDS = {
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "detect": cmd_detect,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[cfg.command](cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except (InvalidArgument, DegenerateSample) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
