"""
Tests for the filmcrew command line.
"""

import json
import shutil

import pytest

from src.cli import main
from tests.conftest import BREAKUP_REPLAY, FIXTURES, FULL_ENVIRONMENT, PROMPTS

GOLDEN = FIXTURES / "golden_script.json"
TRACKING_WITHOUT_MOTION = FIXTURES / "tracking_without_motion.json"


def _produce_args(run_dir, *extra):
    return [
        *extra, "produce", "--topic", "a quarrel and breakup scene", "--replay", str(BREAKUP_REPLAY),
        "--run-dir", str(run_dir), "--env", str(FULL_ENVIRONMENT), "--templates", str(PROMPTS),
    ]


class TestProduce:
    def test_replay_run(self, tmp_path, capsys):
        run_dir = tmp_path / "run"
        assert main(_produce_args(run_dir)) == 0

        assert capsys.readouterr().out.strip() == str(run_dir)
        assert (run_dir / "script_final.json").exists()
        assert (run_dir / "storyboard.txt").exists()

    def test_json_summary(self, tmp_path, capsys):
        run_dir = tmp_path / "run"
        assert main(_produce_args(run_dir, "--json")) == 0

        summary = json.loads(capsys.readouterr().out)
        assert summary["stage"] == "assembled"
        assert summary["calls"] == 25
        assert summary["validator"]["errors"] == 0

    def test_record_copies_transcript(self, tmp_path):
        run_dir = tmp_path / "run"
        record = tmp_path / "fixture"
        assert main(_produce_args(run_dir) + ["--record", str(record)]) == 0
        assert (record / "transcript.jsonl").read_bytes() == (run_dir / "transcript.jsonl").read_bytes()

    def test_topic_required(self, capsys):
        assert main(["produce", "--env", str(FULL_ENVIRONMENT)]) == 2
        assert "--topic" in capsys.readouterr().err

    def test_stage_failure(self, tmp_path, capsys):
        truncated = tmp_path / "short.jsonl"
        lines = (BREAKUP_REPLAY / "transcript.jsonl").read_text(encoding="utf-8").splitlines(keepends=True)
        truncated.write_text("".join(lines[:2]), encoding="utf-8")
        args = _produce_args(tmp_path / "run")
        args[args.index(str(BREAKUP_REPLAY))] = str(truncated)

        assert main(args) == 1
        err = capsys.readouterr().err
        assert "stage script1 failed" in err
        assert "screenwriter" in err

    def test_missing_environment(self, tmp_path):
        args = _produce_args(tmp_path / "run")
        args[args.index(str(FULL_ENVIRONMENT))] = str(tmp_path / "missing.json")
        assert main(args) == 2


class TestValidate:
    def test_clean_script(self, capsys):
        assert main(["validate", str(GOLDEN), "--env", str(FULL_ENVIRONMENT)]) == 0
        assert capsys.readouterr().out == ""

    def test_findings(self, capsys):
        assert main(["validate", str(TRACKING_WITHOUT_MOTION), "--env", str(FULL_ENVIRONMENT)]) == 1
        assert capsys.readouterr().out.strip() == (
            "error TrackingNeedsMotion scene 1 event 1: Tracking Shot is not applicable as Alex is not moving"
            " (suggestion: Medium Shot)"
        )

    def test_json_records(self, capsys):
        assert main(["--json", "validate", str(TRACKING_WITHOUT_MOTION), "--env", str(FULL_ENVIRONMENT)]) == 1
        record = json.loads(capsys.readouterr().out)
        assert record == {
            "rule": "TrackingNeedsMotion",
            "severity": "error",
            "scene": 1,
            "event": 1,
            "message": "Tracking Shot is not applicable as Alex is not moving",
            "suggestion": "Medium Shot",
        }

    def test_unparseable_script(self, tmp_path, capsys):
        broken = tmp_path / "broken.json"
        broken.write_text('{"scenes": [', encoding="utf-8")

        assert main(["validate", str(broken), "--env", str(FULL_ENVIRONMENT)]) == 2
        assert "line 1" in capsys.readouterr().err


class TestRender:
    def test_storyboard_next_to_script(self, tmp_path, capsys):
        script = tmp_path / "golden.json"
        shutil.copy(GOLDEN, script)

        assert main(["render", str(script), "--env", str(FULL_ENVIRONMENT)]) == 0

        storyboard = (tmp_path / "storyboard.txt").read_text(encoding="utf-8")
        assert storyboard.startswith("Scene 1: Apartment living room (Mia, Alex)\n")
        assert "Total running time:" in storyboard
        assert capsys.readouterr().out.strip() == str(tmp_path / "storyboard.txt")

    def test_rate_changes_timing(self, tmp_path):
        slow, fast = tmp_path / "slow.txt", tmp_path / "fast.txt"
        main(["render", str(GOLDEN), "--env", str(FULL_ENVIRONMENT), "--rate", "1", "--output", str(slow)])
        main(["render", str(GOLDEN), "--env", str(FULL_ENVIRONMENT), "--rate", "5", "--output", str(fast)])
        assert slow.read_text(encoding="utf-8") != fast.read_text(encoding="utf-8")

    def test_refuses_invalid_script(self, tmp_path, capsys):
        output = tmp_path / "s.txt"
        assert main(["render", str(TRACKING_WITHOUT_MOTION), "--env", str(FULL_ENVIRONMENT), "--output", str(output)]) == 1
        assert "TrackingNeedsMotion" in capsys.readouterr().err
        assert not output.exists()

    def test_rate_must_be_positive(self):
        with pytest.raises(SystemExit):
            main(["render", str(GOLDEN), "--rate", "0"])


class TestEnv:
    def test_stats(self, capsys):
        assert main(["env", "stats", str(FULL_ENVIRONMENT)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "15 locations, 65 positions (32 standing / 33 sitting), 21 actions, 9 shots"
        assert "  Roadside: capacity 2" in lines

    def test_stats_json(self, capsys):
        assert main(["--json", "env", "stats", str(FULL_ENVIRONMENT)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert (stats["locations"], stats["static_shots"], stats["dynamic_shots"]) == (15, 3, 6)

    def test_list(self, capsys):
        assert main(["env", "list", str(FULL_ENVIRONMENT)]) == 0
        out = capsys.readouterr().out
        assert "  Roadside (capacity 2)" in out
        assert "Shots:" in out

    def test_missing_file(self, tmp_path):
        assert main(["env", "stats", str(tmp_path / "nope.json")]) == 2
