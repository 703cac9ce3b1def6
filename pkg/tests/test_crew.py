"""
Tests for the prompt template library, rendering and role-agent invocation.
"""

import shutil

import pytest

from src.errors import IntegrityError, MissingVariable, SchemaRetriesExhausted
from src.models import Role
from src.services.crew import SHOT_ANNOTATION_REQUIREMENTS, TemplateLibrary, filter_actor_feedback, render
from tests.conftest import PROMPTS

TEMPLATE_IDS = [
    "prompt:actor_feedback",
    "prompt:cinema",
    "prompt:debate",
    "prompt:director_feedback",
    "prompt:director_filter",
    "prompt:director_verify",
    "prompt:director_verify_2",
    "prompt:judge",
    "prompt:plan_1",
    "prompt:plan_2",
    "prompt:script_1",
    "prompt:script_2",
    "prompt:script_3",
    "prompt:script_4",
    "prompt:writer_correct",
]

CORE_PLACEHOLDERS = {
    "topic", "scene_outline", "draft_script", "character", "character_profile", "final_script",
    "peer_annotation", "director_critique", "actor_critique", "filtered_critique", "updated_script",
    "initial_position", "position_description", "shot_list", "action_list", "dialogue_with_insertion",
    "characters_in_standing_state", "male_characters", "female_characters", "dialogue_draft",
}

PLACEHOLDER_UNIVERSE = CORE_PLACEHOLDERS | {
    "character_profiles", "location_list", "shot_annotation_requirements",
    "peer_annotation_1", "peer_annotation_2", "final_script_with_own_annotation",
}

JUDGE_VARIABLES = {
    "final_script": "SCRIPT",
    "peer_annotation_1": {"scene 1": {"selected-shot-1": {"shot": "Long Shot"}}},
    "peer_annotation_2": "SET 2",
    "shot_list": "SHOTS",
    "shot_annotation_requirements": SHOT_ANNOTATION_REQUIREMENTS,
}


class TestTemplateLibrary:
    def test_inventory(self, library):
        assert library.ids() == TEMPLATE_IDS
        assert len(library) == 15

    def test_roles(self, library):
        assert library.get("plan_1").role is Role.DIRECTOR
        assert library.get("prompt:actor_feedback").role is Role.ACTOR
        assert library.get("debate").role is Role.CINEMATOGRAPHER
        assert library.get("script_4").role is Role.SCREENWRITER

    def test_placeholder_ownership(self, library):
        declared = {name for template_id in library.ids() for name in library.get(template_id).required_vars}
        assert CORE_PLACEHOLDERS <= declared
        assert declared <= PLACEHOLDER_UNIVERSE

    def test_unknown_template(self, library):
        with pytest.raises(IntegrityError):
            library.get("prompt:storyboard")

    def test_body_and_descriptor_disagree(self, tmp_path):
        target = tmp_path / "prompts"
        shutil.copytree(PROMPTS, target)
        body = target / "judge.txt"
        body.write_text(body.read_text(encoding="utf-8") + "\n{extra_hint}\n", encoding="utf-8")

        with pytest.raises(IntegrityError) as exc_info:
            TemplateLibrary.load(target)
        assert exc_info.value.invariant == "placeholders match required_vars"

    def test_missing_body(self, tmp_path):
        target = tmp_path / "prompts"
        shutil.copytree(PROMPTS, target)
        (target / "plan_1.txt").unlink()

        with pytest.raises(IntegrityError):
            TemplateLibrary.load(target)


class TestRender:
    def test_every_placeholder_resolved(self, library):
        text = render(library.get("judge"), JUDGE_VARIABLES)

        assert "{final_script}" not in text
        assert "SCRIPT" in text and "SET 2" in text
        assert '"selected-shot-1"' in text
        assert '{"reason": "...", "better": "1"}' in text

    def test_missing_variable(self, library):
        variables = dict(JUDGE_VARIABLES)
        del variables["shot_list"]

        with pytest.raises(MissingVariable) as exc_info:
            render(library.get("judge"), variables)
        assert exc_info.value.name == "shot_list"
        assert exc_info.value.exit_code == 2

    def test_extra_variables_ignored(self, library):
        text = render(library.get("plan_1"), {"topic": "a surprise birthday", "unused": 1})
        assert "a surprise birthday" in text


class TestInvoke:
    def test_valid_reply(self, crew, director):
        agents = crew([("director", 'Thinking it over... {"reason": "tighter", "better": "2"}')])
        assert agents.invoke(director, "judge", JUDGE_VARIABLES) == {"reason": "tighter", "better": "2"}

    def test_schema_failure_is_retried(self, crew, director):
        agents = crew([("director", {"better": "3"}), ("director", {"better": 1})])
        assert agents.invoke(director, "judge", JUDGE_VARIABLES) == {"better": 1}
        assert agents.provider.remaining() == 0

    def test_extra_check_runs_after_schema(self, crew, director):
        agents = crew([("director", {"better": "1"}), ("director", {"better": "2"})])

        def only_two(document):
            return [] if str(document["better"]) == "2" else ["pick the second set"]

        assert agents.invoke(director, "judge", JUDGE_VARIABLES, schema_check=only_two) == {"better": "2"}

    def test_retries_exhausted_carry_context(self, crew, director):
        agents = crew([("director", "no idea")] * 2, json_attempts=2)

        with pytest.raises(SchemaRetriesExhausted) as exc_info:
            agents.invoke(director, "judge", JUDGE_VARIABLES)
        assert exc_info.value.context["template"] == "prompt:judge"
        assert exc_info.value.context["role"] == "director"

    def test_note_is_appended(self, crew, director):
        profile = {
            "name": "Mia", "age": "28", "gender": "female", "occupation": "Designer",
            "personality traits": "Direct", "speaking style": "Blunt",
        }
        agents = crew([("director", [profile])])
        agents.invoke(director, "plan_1", {"topic": "a quarrel"}, note="Use two characters.")

        prompt = agents.provider.transcript.records[0].request[0].content
        assert prompt.endswith("### Note:\nUse two characters.")


class TestActorFeedback:
    def test_only_own_lines_kept(self, golden):
        entries = [
            {"speaker": "Mia", "content": "I cannot believe a single word you say  anymore.", "feedback": "softer"},
            {"speaker": "Alex", "content": "I know. I should have told you, and I am sorry.", "feedback": "pause"},
            {"speaker": "Mia", "content": "A line nobody wrote.", "feedback": "cut"},
        ]
        kept, dropped = filter_actor_feedback(entries, "Mia", golden)

        assert [e["feedback"] for e in kept] == ["softer"]
        assert [e["feedback"] for e in dropped] == ["pause", "cut"]

    def test_empty_feedback(self, golden):
        assert filter_actor_feedback([], "Alex", golden) == ([], [])
