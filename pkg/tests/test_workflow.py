"""
Tests for the production workflow: the recorded breakup run end to end, resume, and
stage behaviour driven by hand-written replies.
"""

import json

import pytest

from src.errors import ConstraintViolation, InsertionOutOfRange, ReplayExhausted, ValidationGateFailed
from src.models import CollaborationMode, ProviderCallRecord, Stage
from src.services.script_codec import parse_document, parse_script
from src.services.transcript import load_records
from src.services.workflow import (
    ACTOR_FEEDBACK_FILE,
    FINAL_FILE,
    MANIFEST_FILE,
    REVISIONS_FILE,
    STORYBOARD_FILE,
    Production,
    make_provider,
    open_run,
)
from tests.conftest import BREAKUP_REPLAY, load_fixture, mutate

TOPIC = "a quarrel and breakup scene"

MIA = {
    "name": "Mia", "age": "28", "gender": "female", "occupation": "Graphic designer",
    "personality traits": "Direct", "speaking style": "Blunt",
}
ALEX = {
    "name": "Alex", "age": "30", "gender": "male", "occupation": "Software engineer",
    "personality traits": "Reserved", "speaking style": "Hesitant",
}
LILY = {
    "name": "Lily", "age": "29", "gender": "female", "occupation": "Photographer",
    "personality traits": "Warm", "speaking style": "Playful",
}


def _outline(characters, location):
    return {
        "sub-topic": "The talk",
        "selected-characters": characters,
        "selected-location": location,
        "story-plot": "They talk.",
        "dialogue-goal": "Clear the air.",
    }


def _produce(settings, env, library, run_dir, replay=BREAKUP_REPLAY):
    store, state, transcript = open_run(settings, TOPIC, run_dir)
    provider = make_provider(settings, transcript, replay)
    return Production(settings, env, library, provider, store, state).run()


def _write_records(path, records):
    path.write_text("".join(record.model_dump_json() + "\n" for record in records), encoding="utf-8")
    return path


class TestBreakupReplay:
    @pytest.fixture
    def bundle(self, settings, env, library, tmp_path):
        return _produce(settings, env, library, tmp_path / "first")

    def test_manifest(self, bundle):
        manifest = bundle.manifest

        assert manifest["stage_calls"] == {
            "idea": 2, "script1": 6, "script2": 3, "script3": 5, "cinema": 9, "assembled": 0,
        }
        assert manifest["total_calls"] == 25
        assert manifest["validator"] == {"errors": 0, "warnings": 0, "info": 0}
        assert manifest["provider"] == "replay"
        assert manifest["config"]["ccv_max"] == 3
        assert manifest["config"]["mode"] == "group"
        assert (manifest["scenes"], manifest["lines"]) == (2, 10)

    def test_final_script(self, bundle, tmp_path):
        script = parse_script((tmp_path / "first" / FINAL_FILE).read_text(encoding="utf-8"))
        living_room, roadside = script.scenes

        assert living_room.events[0].move.character == "Mia"
        assert living_room.events[0].move.destination == "Position A"
        assert living_room.events[2].actions[0].action == "Standing Thinking"
        assert living_room.events[6].content == "I know. I should have told you, and I am sorry."
        assert roadside.events[3].actions[0].action == "Standing Deny"
        assert [event.shot for event in living_room.events] == [
            "Tracking Shot", "Medium Shot", "Pan Shot", "Pan Shot", "Close-up Shot", "Close-up Shot", "Medium Shot",
        ]
        assert [event.shot for event in roadside.events] == ["Truck Shot", "Close-up Shot", "Long Shot", "Zoom Shot"]
        assert all(event.current_position is not None for event in living_room.events)

    def test_storyboard(self, bundle, tmp_path):
        lines = (tmp_path / "first" / STORYBOARD_FILE).read_text(encoding="utf-8").splitlines()

        assert lines[0] == "Scene 1: Apartment living room (Mia, Alex)"
        assert lines[1] == "[t=0.0s] Tracking Shot — Mia moves to Position A"
        assert lines[2] == (
            '[t=3.0s] Medium Shot — Mia: "Alex, what is this? I found messages between you and Lily."'
            " — Mia: Standing Arguing"
        )
        assert lines[3].startswith("[t=7.4s] Pan Shot — Alex:")

    def test_revisions(self, bundle, tmp_path):
        revisions = json.loads((tmp_path / "first" / REVISIONS_FILE).read_text(encoding="utf-8"))
        assert [(r["scene_index"], r["line_index"]) for r in revisions] == [(0, 1), (0, 5), (1, 3)]
        assert revisions[2]["before"]["actions"][0]["action"] == "Standing Farewell"

    def test_run_state(self, bundle, tmp_path):
        state = json.loads((tmp_path / "first" / "run_state.json").read_text(encoding="utf-8"))
        assert state["stage"] == Stage.ASSEMBLED.value
        assert state["call_count"] == 25
        assert MANIFEST_FILE in state["artifacts"]["assembled"]

    def test_replay_is_byte_identical(self, bundle, settings, env, library, tmp_path):
        _produce(settings, env, library, tmp_path / "second")

        for name in (FINAL_FILE, "transcript.jsonl", STORYBOARD_FILE):
            first = (tmp_path / "first" / name).read_bytes()
            assert first == (tmp_path / "second" / name).read_bytes(), name


class TestResume:
    def test_resume_after_failure(self, settings, env, library, tmp_path):
        uninterrupted = tmp_path / "uninterrupted"
        _produce(settings, env, library, uninterrupted)

        truncated = _write_records(tmp_path / "truncated.jsonl", load_records(BREAKUP_REPLAY)[:11])
        run_dir = tmp_path / "resumed"
        with pytest.raises(ReplayExhausted) as exc_info:
            _produce(settings, env, library, run_dir, replay=truncated)
        assert exc_info.value.context["stage"] == Stage.SCRIPT3.value

        saved = json.loads((run_dir / "run_state.json").read_text(encoding="utf-8"))
        assert (saved["stage"], saved["call_count"]) == (Stage.SCRIPT2.value, 11)
        persisted = load_records(run_dir)
        assert len(persisted) == 12
        assert persisted[-1].failed and persisted[-1].call_index == 11

        store, state, transcript = open_run(settings, resume=run_dir)
        assert len(transcript) == 11
        provider = make_provider(settings, transcript, BREAKUP_REPLAY)
        Production(settings, env, library, provider, store, state).run()

        for name in (FINAL_FILE, "transcript.jsonl"):
            assert (run_dir / name).read_bytes() == (uninterrupted / name).read_bytes(), name

    def test_topic_required(self, settings):
        with pytest.raises(ConstraintViolation):
            open_run(settings)


class TestSoloMode:
    def _solo_records(self):
        records = load_records(BREAKUP_REPLAY)
        kept = records[:8] + [records[16]]
        fixed = kept[6].response.replace("Standing Farewell", "Standing Deny")
        kept[6] = kept[6].model_copy(update={"response": fixed})
        return kept

    def test_solo_run(self, settings, env, library, tmp_path):
        solo = settings.model_copy(update={"collaboration_mode": CollaborationMode.SOLO})
        replay = _write_records(tmp_path / "solo.jsonl", self._solo_records())
        bundle = _produce(solo, env, library, tmp_path / "solo", replay=replay)

        assert bundle.manifest["stage_calls"] == {
            "idea": 2, "script1": 6, "script2": 0, "script3": 0, "cinema": 1, "assembled": 0,
        }
        roadside = bundle.script.scenes[1]
        assert roadside.events[0].shot == "Long Shot"
        assert bundle.manifest["validator"]["errors"] == 0

    def test_unrepaired_action_fails_the_gate(self, settings, env, library, tmp_path):
        solo = settings.model_copy(update={"collaboration_mode": CollaborationMode.SOLO})
        records = load_records(BREAKUP_REPLAY)
        replay = _write_records(tmp_path / "solo.jsonl", records[:8] + [records[16]])

        with pytest.raises(ValidationGateFailed) as exc_info:
            _produce(solo, env, library, tmp_path / "solo", replay=replay)
        assert exc_info.value.context["stage"] == Stage.CINEMA.value
        assert [d.rule.value for d in exc_info.value.diagnostics] == ["UnknownAction"]


class TestDevelopIdea:
    def test_capacity_violation_is_retried_with_a_note(self, production):
        run = production([
            ("director", [MIA, ALEX, LILY]),
            ("director", [_outline(["Mia", "Alex", "Lily"], "Roadside")]),
            ("director", [_outline(["Mia", "Alex", "Lily"], "apartment living room")]),
        ])
        profiles, outlines = run.develop_idea(TOPIC)

        assert [p.name for p in profiles] == ["Mia", "Alex", "Lily"]
        assert outlines[0].selected_location == "Apartment living room"
        retry = run.provider.transcript.records[2].request[0].content
        assert "### Note:" in retry
        assert "3 characters exceed the capacity 2 of Roadside" in retry

    def test_second_violation_fails(self, production):
        run = production([
            ("director", [MIA, ALEX]),
            ("director", [_outline(["Mia"], "Roadside")]),
            ("director", [_outline(["Mia"], "Roadside")]),
        ])

        with pytest.raises(ConstraintViolation) as exc_info:
            run.develop_idea(TOPIC)
        assert exc_info.value.field == "selected-characters"
        assert exc_info.value.context["template"] == "prompt:plan_2"

    def test_unused_profiles_are_dropped(self, production):
        run = production([
            ("director", [MIA, ALEX, LILY]),
            ("director", [_outline("Mia, Alex", "Roadside")]),
        ])
        profiles, _ = run.develop_idea(TOPIC)

        assert [p.name for p in profiles] == ["Mia", "Alex"]
        assert any("Lily" in warning for warning in run.state.warnings)

    def test_unknown_location(self, production):
        run = production([
            ("director", [MIA, ALEX]),
            ("director", [_outline(["Mia", "Alex"], "Moon base")]),
            ("director", [_outline(["Mia", "Alex"], "Office")]),
        ])
        _, outlines = run.develop_idea(TOPIC)
        assert outlines[0].selected_location == "Office"


class TestDrafting:
    def test_insertion_out_of_range(self, production):
        responses = [(r.agent_tag, r.response) for r in load_records(BREAKUP_REPLAY)[:5]]
        responses.append(("screenwriter", {
            "move": {"character": "Mia", "destination": "Position A"},
            "insertion": {"insertion position": "<Insertion Position 99>"},
        }))
        run = production(responses)

        with pytest.raises(InsertionOutOfRange) as exc_info:
            run.run()
        assert exc_info.value.context["stage"] == Stage.SCRIPT1.value
        assert "99" in str(exc_info.value)


class TestActorReview:
    def test_nothing_adopted(self, production, golden):
        run = production([
            ("actor-Mia", [{"speaker": "Mia", "content": "I cannot believe a single word you say anymore.",
                            "feedback": "Keep it."}]),
            ("actor-Alex", []),
            ("director", {"reason": "The script already works.", "adopted-suggestions": "None"}),
        ])
        revised = run.revise_with_actors(golden)

        assert revised is golden
        assert run.provider.remaining() == 0
        record = json.loads((run.store.run_dir / ACTOR_FEEDBACK_FILE).read_text(encoding="utf-8"))
        assert record["decision"]["adopted-suggestions"] == "None"
        assert len(record["feedback"]["actor-Mia"]["kept"]) == 1

    def test_adopted_feedback_rewrites_the_line(self, production):
        case = load_fixture("support_circle.json")
        script = parse_document(case["script"])
        run = production([tuple(reply) for reply in case["replies"]])

        revised = run.revise_with_actors(script)

        dana = revised.scenes[0].events[3]
        assert dana.speaker == "Dana"
        assert dana.content.startswith("That must have been really tough for you.")
        assert [e.content for i, e in enumerate(revised.scenes[0].events) if i != 3] == [
            e.content for i, e in enumerate(script.scenes[0].events) if i != 3
        ]

        tags = [r.agent_tag for r in run.provider.transcript.records]
        assert tags[:5] == ["actor-Brooke", "actor-Dana", "actor-Alex", "actor-Casey", "director"]
        assert run.provider.transcript.counts_by_tag() == {
            "actor-Brooke": 1, "actor-Dana": 1, "actor-Alex": 1, "actor-Casey": 1,
            "director": 2, "screenwriter": 1,
        }
        assert run.provider.remaining() == 0

        record = json.loads((run.store.run_dir / ACTOR_FEEDBACK_FILE).read_text(encoding="utf-8"))
        assert [entry["speaker"] for entry in record["decision"]["adopted-suggestions"]] == ["Dana"]
        assert len(record["feedback"]["actor-Alex"]["kept"]) == 1

    def test_filter_skipped_without_feedback(self, production, golden):
        run = production([
            ("actor-Mia", [{"speaker": "Alex", "content": "Not my line.", "feedback": "x"}]),
            ("actor-Alex", []),
        ])
        assert run.revise_with_actors(golden) is golden
        assert len(run.provider.transcript) == 2
        assert any("actor-Mia" in warning for warning in run.state.warnings)


class TestDirectorReview:
    def test_unverified_loop_keeps_last_revision(self, production, golden_document):
        script = parse_document(golden_document)
        revision = json.loads(json.dumps(golden_document["scenes"]))
        revision[0]["scene"][2]["content"] = "Mia, let me explain."
        feedback = {"action-reasonableness": "ok", "theme-consistency": "ok", "script-fluency": "stiff"}
        run = production([
            ("director", feedback),
            ("screenwriter", revision),
            ("director", {"finalize": "False"}),
            ("director", feedback),
        ], ccv_max_rounds=2)

        revised = run.revise_with_director(script)

        assert revised.scenes[0].events[2].content == "Mia, let me explain."
        assert any("unverified" in warning for warning in run.state.warnings)
        assert run.provider.remaining() == 0


class TestCameraGate:
    @pytest.mark.parametrize("shot", ["Tracking Shot", "Curve Surround Shot"])
    def test_opening_shot_fix_wins(self, production, golden_document, shot):
        script = parse_document(mutate(golden_document, "scenes.1.scene.0.shot", shot))

        gated = production([])._gate(script)

        assert [event.shot for event in gated.scenes[1].events] == [
            "Long Shot", "Close-up Shot", "Long Shot", "Zoom Shot",
        ]


def test_transcript_records_round_trip(tmp_path):
    records = load_records(BREAKUP_REPLAY)
    path = _write_records(tmp_path / "copy.jsonl", records)
    assert load_records(path) == records
    assert all(isinstance(r, ProviderCallRecord) for r in records)
