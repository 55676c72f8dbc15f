"""Command-line tests: exit codes, stream discipline, config merge, replay."""

from __future__ import annotations

import json

import numpy as np
import pytest

from unlescore.cli import main
from unlescore.fileio import CSV_COLUMNS, read_report, write_confidence_file
from unlescore.records import SplitLabel

from conftest import make_record, random_records


@pytest.fixture
def input_csv(rng, tmp_path):
    path = tmp_path / "records.csv"
    write_confidence_file(random_records(rng), path)
    return str(path)


@pytest.fixture
def clean_csv(rng, tmp_path):
    """Separable set whose tuned detect verdict is clean."""
    records = []
    for i, c in enumerate(rng.uniform(0.3, 0.9, size=60)):
        records.append(make_record(f"nm-{i:03d}", float(c), float(c * 0.9), SplitLabel.NONMEMBER))
    for i in range(40):
        records.append(
            make_record(f"ul-{i:03d}", 0.95, float(rng.uniform(0.01, 0.03)), SplitLabel.UNLEARNED_MEMBER)
        )
        c = float(rng.uniform(0.88, 0.92))
        records.append(make_record(f"rt-{i:03d}", c, c, SplitLabel.RETAINED_MEMBER))
    path = tmp_path / "clean.csv"
    write_confidence_file(records, path)
    return str(path)


class TestScore:
    def test_writes_report_file(self, input_csv, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["score", "--input", input_csv, "--output", str(out)]) == 0
        assert f"wrote {out}" in capsys.readouterr().err
        report = read_report(out)
        assert report.metadata["config"]["command"] == "score"
        assert report.metadata["config"]["input"] == input_csv
        assert len(report.scores) == 110

    def test_stdout_is_pure_report(self, input_csv, capsys):
        assert main(["score", "--input", input_csv]) == 0
        captured = capsys.readouterr()
        doc = json.loads(captured.out)
        assert doc["schema_version"] == 1
        assert "wrote" not in captured.err

    def test_csv_scores_format(self, input_csv, capsys):
        assert main(["score", "--input", input_csv, "--format", "csv_scores"]) == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header.startswith("sample_id,h_ori,")

    def test_missing_input_flag(self, capsys):
        assert main(["score"]) == 2
        assert "--input is required" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        assert main(["score", "--input", str(tmp_path / "nope.csv")]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_malformed_csv_is_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n")
        assert main(["score", "--input", str(bad)]) == 3
        assert "parse error" in capsys.readouterr().err

    def test_validation_failure_lists_violations(self, tmp_path, capsys):
        path = tmp_path / "dup.csv"
        write_confidence_file(
            [
                make_record("a", 0.5, 0.5),
                make_record("a", 0.4, 0.4),
                make_record("b", 0.5, 0.5),
            ],
            path,
        )
        assert main(["score", "--input", str(path)]) == 2
        err = capsys.readouterr().err
        assert "validation: a: duplicate sample_id" in err
        assert "1 validation violation(s)" in err

    def test_unwritable_output_is_internal_error(self, input_csv, tmp_path, capsys):
        out = tmp_path / "missing_dir" / "report.json"
        assert main(["score", "--input", input_csv, "--output", str(out)]) == 1
        assert "internal error" in capsys.readouterr().err

    def test_stamp_opt_in(self, input_csv, capsys):
        assert main(["score", "--input", input_csv]) == 0
        assert json.loads(capsys.readouterr().out)["metadata"]["timestamp"] is None
        assert main(["score", "--input", input_csv, "--stamp"]) == 0
        stamped = json.loads(capsys.readouterr().out)["metadata"]["timestamp"]
        assert stamped is not None and "T" in stamped

    def test_shadow_baselines_flow_through(self, rng, tmp_path, capsys):
        records = random_records(rng)
        csv_path = tmp_path / "records.csv"
        write_confidence_file(records, csv_path)
        shadow_path = tmp_path / "shadows.jsonl"
        lines = [
            json.dumps({"sample_id": r.sample_id, "shadow_confs": [0.2, 0.4, 0.6]})
            for r in records
        ]
        shadow_path.write_text("\n".join(lines) + "\n")
        assert main(["score", "--input", str(csv_path), "--shadow", str(shadow_path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc["summary"]["baselines"]) == {"lira_nmi", "update_diff", "update_ratio"}
        assert doc["scores"][0]["lira_nmi"] is not None


class TestReplay:
    def test_echoed_config_reproduces_bytes(self, input_csv, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(
            ["score", "--input", input_csv, "--output", str(out), "--no-timing"]
        ) == 0
        first = out.read_bytes()
        echo = json.loads(first)["metadata"]["config"]
        cfg_path = tmp_path / "replay.json"
        cfg_path.write_text(json.dumps(echo))
        assert main(["score", "--config", str(cfg_path)]) == 0
        assert out.read_bytes() == first
        capsys.readouterr()

    def test_flags_override_config_file(self, input_csv, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"input": "does-not-exist.csv", "seed": 5}))
        assert main(["score", "--config", str(cfg_path), "--input", input_csv]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["metadata"]["seed"] == 5
        assert doc["metadata"]["config"]["input"] == input_csv

    def test_unknown_config_field(self, input_csv, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"inptu": "x.csv"}))
        assert main(["score", "--config", str(cfg_path), "--input", input_csv]) == 2
        assert "unknown config fields: inptu" in capsys.readouterr().err

    def test_invalid_config_json(self, input_csv, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text("{not json")
        assert main(["score", "--config", str(cfg_path), "--input", input_csv]) == 3
        capsys.readouterr()


class TestEvaluate:
    def test_headline_and_targets(self, input_csv, capsys):
        code = main(
            ["evaluate", "--input", input_csv, "--fpr", "0.05", "--fpr", "0.5"]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert "auc=" in captured.err and "tpr@0.05=" in captured.err
        doc = json.loads(captured.out)
        targets = [e["target_fpr"] for e in doc["summary"]["evaluation"]["tpr_at_fpr"]]
        assert targets == [0.05, 0.5]
        assert doc["metadata"]["config"]["fpr_targets"] == [0.05, 0.5]

    def test_requires_both_member_splits(self, rng, tmp_path, capsys):
        records = [r for r in random_records(rng) if r.split is not SplitLabel.UNLEARNED_MEMBER]
        path = tmp_path / "partial.csv"
        write_confidence_file(records, path)
        assert main(["evaluate", "--input", str(path)]) == 2
        assert "missing: unlearned_member" in capsys.readouterr().err

    def test_roc_tsv_output(self, input_csv, capsys):
        assert main(["evaluate", "--input", input_csv, "--format", "roc_tsv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "threshold\tfpr\ttpr"
        assert lines[1].startswith("inf\t")


class TestDetect:
    def test_clean_exit_zero(self, clean_csv, capsys):
        code = main(
            ["detect", "--input", clean_csv, "--tau-u", "0.3",
             "--robust-k", "7.0", "--peak-ratio-min", "0.4"]
        )
        captured = capsys.readouterr()
        assert code == 0, captured.err
        assert "verdict=clean" in captured.err
        doc = json.loads(captured.out)
        assert doc["anomaly"]["verdict"] == "clean"
        assert doc["anomaly"]["tau_u"] == 0.3

    def test_alarm_exit_four(self, clean_csv, capsys):
        # tau_u = 1.0 flags every requested sample by definition.
        code = main(["detect", "--input", clean_csv, "--tau-u", "1.0"])
        captured = capsys.readouterr()
        assert code == 4
        assert "verdict=" in captured.err and "under_flags=40" in captured.err

    def test_bad_threshold_is_validation_error(self, clean_csv, capsys):
        assert main(["detect", "--input", clean_csv, "--tau-u", "1.5"]) == 2
        capsys.readouterr()


class TestBench:
    def test_preset_required(self, capsys):
        assert main(["bench"]) == 2
        assert "--preset is required" in capsys.readouterr().err

    def test_utility_tree_and_determinism(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["bench", "--preset", "utility", "--output", str(out_a)]) == 0
        assert main(["bench", "--preset", "utility", "--output", str(out_b)]) == 0
        capsys.readouterr()
        names_a = sorted(p.name for p in out_a.iterdir())
        assert names_a == ["report.json", "run_config.json"]
        for name in names_a:
            if name == "run_config.json":
                continue  # echoes --output, which differs by design
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
        report = read_report(out_a / "report.json")
        assert report.metadata["config"]["preset"] == "utility"
        assert report.timing is None  # bench artifacts replay byte-identically

    def test_seed_override_recorded(self, tmp_path, capsys):
        out = tmp_path / "seeded"
        assert main(["bench", "--preset", "utility", "--output", str(out), "--seed", "99"]) == 0
        capsys.readouterr()
        report = read_report(out / "report.json")
        assert report.metadata["seed"] == 99
        assert report.metadata["config"]["seed"] == 99

    def test_threshold_override_reaches_detector(self, tmp_path, capsys):
        out = tmp_path / "tuned"
        code = main(
            ["bench", "--preset", "utility", "--output", str(out), "--tau-u", "0.25"]
        )
        assert code == 0
        capsys.readouterr()
        report = read_report(out / "report.json")
        assert report.anomaly.tau_u == 0.25


class TestArgparseContract:
    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2

    def test_bad_choice_exits_two(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["bench", "--preset", "nope"])
        assert err.value.code == 2
        capsys.readouterr()

    def test_module_entry_point(self, input_csv, tmp_path):
        # python -m unlescore.cli is the documented invocation.
        import subprocess
        import sys

        out = tmp_path / "report.json"
        proc = subprocess.run(
            [sys.executable, "-m", "unlescore.cli", "score",
             "--input", input_csv, "--output", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
