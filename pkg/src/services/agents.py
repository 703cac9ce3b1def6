"""
Prompt-backed crew members for the collaboration loops.

Each class adapts one role to a collaboration protocol: the screenwriter revises,
the director critiques, verifies and judges, and cinematographers annotate and debate.
Agents hold the latest artifact they produced so the workflow can read it back
without re-parsing text.
"""

import json
import logging
from typing import Any, List, Optional

from ..errors import FilmCrewError, MergeArityMismatch
from ..models import (
    AnnotatedScript,
    CameraAnnotationSet,
    DialogueHistory,
    EnvironmentSpec,
    Judgment,
    Peer,
    RoleAgent,
    Verdict,
)
from .camera import apply_debate_feedback, as_flag, merge_shots
from .crew import SHOT_ANNOTATION_REQUIREMENTS, Crew
from .environment import describe_actions, describe_shots
from .script_codec import merge_revision, script_document, serialize_script
from .validator import initial_postures

logger = logging.getLogger(__name__)


def _dump(document: Any) -> str:
    return json.dumps(document, indent=4, ensure_ascii=False)


def describe_initial_positions(script: AnnotatedScript, env: EnvironmentSpec) -> str:
    """Per scene: "Mia: Position D, unsittable, standing; ..." """
    lines = []
    for index, scene in enumerate(script.scenes, start=1):
        location = env.location(scene.location)
        postures = initial_postures(scene)
        entries = []
        for entry in scene.initial_position:
            position = location.position(entry.position) if location is not None else None
            seat = "sittable" if position is not None and position.sittable else "unsittable"
            entries.append(f"{entry.character}: {entry.position}, {seat}, {postures[entry.character].value}")
        lines.append(f"Scene {index} ({scene.location}): {'; '.join(entries)}")
    return "\n".join(lines)


class ScriptReviser:
    """Screenwriter side of a critique loop. Round one answers with the current draft."""

    def __init__(self, crew: Crew, agent: RoleAgent, env: EnvironmentSpec, script: AnnotatedScript):
        self.crew = crew
        self.agent = agent
        self.tag = agent.tag
        self.env = env
        self.script = script

    def respond(self, history: DialogueHistory) -> str:
        if len(history) > 2:
            critique = history.entries[-1].content
            previous = self.script

            def mergeable(document: Any) -> List[str]:
                try:
                    merge_revision(previous, document)
                except FilmCrewError as exc:
                    return [exc.message]
                return []

            document = self.crew.invoke(self.agent, "writer_correct", {
                "topic": previous.topic or history.context,
                "director_critique": critique,
                "draft_script": script_document(previous, scenes_only=True),
                "action_list": describe_actions(self.env),
                "initial_position": describe_initial_positions(previous, self.env),
            }, schema_check=mergeable)
            self.script = merge_revision(previous, document)
        return serialize_script(self.script, scenes_only=True)


class DirectorCritic:
    """Director reviewing the screenwriter's draft."""

    def __init__(self, crew: Crew, agent: RoleAgent, env: EnvironmentSpec, topic: str):
        self.crew = crew
        self.agent = agent
        self.tag = agent.tag
        self.env = env
        self.topic = topic

    def critique(self, history: DialogueHistory, response: str) -> str:
        document = self.crew.invoke(self.agent, "director_feedback", {
            "topic": self.topic,
            "draft_script": response,
            "action_list": describe_actions(self.env),
        })
        return _dump(document)

    def verify(self, context: str, instruction: str, response: str, critique: str) -> Verdict:
        document = self.crew.invoke(self.agent, "director_verify", {
            "director_critique": critique,
            "updated_script": response,
        })
        return Verdict(finalize=as_flag(document["finalize"]), rationale=_dump(document))


class AdoptedFeedbackCritic:
    """Director standing behind the actor suggestions they adopted.

    The critique is the adopted feedback itself; only verification calls the model.
    """

    def __init__(self, crew: Crew, agent: RoleAgent, adopted: str):
        self.crew = crew
        self.agent = agent
        self.tag = agent.tag
        self.adopted = adopted

    def critique(self, history: DialogueHistory, response: str) -> str:
        return self.adopted

    def verify(self, context: str, instruction: str, response: str, critique: str) -> Verdict:
        document = self.crew.invoke(self.agent, "director_verify_2", {
            "filtered_critique": critique,
            "updated_script": response,
        })
        return Verdict(finalize=as_flag(document["finalize"]), rationale=str(document.get("reason", "")))


class Cinematographer:
    """Debate peer producing and defending a camera annotation set."""

    def __init__(self, crew: Crew, agent: RoleAgent, env: EnvironmentSpec, script: AnnotatedScript):
        self.crew = crew
        self.agent = agent
        self.tag = agent.tag
        self.env = env
        self.script = script
        self.annotations: Optional[CameraAnnotationSet] = None
        self.reviews: List[Any] = []

    def respond(self, history: DialogueHistory) -> str:
        document = self.crew.invoke(self.agent, "cinema", {
            "final_script": script_document(self.script, scenes_only=True),
            "shot_list": describe_shots(self.env),
            "shot_annotation_requirements": SHOT_ANNOTATION_REQUIREMENTS,
        })
        self.annotations = CameraAnnotationSet.from_document(document, self.tag)
        return _dump(self.annotations.to_document())

    def review(self, history: DialogueHistory, own: str, other: str, received: Optional[str]) -> str:
        own_set = CameraAnnotationSet.from_document(json.loads(own), self.tag)
        try:
            annotated = script_document(merge_shots(self.script, own_set), scenes_only=True)
        except MergeArityMismatch:
            annotated = script_document(self.script, scenes_only=True)
        document = self.crew.invoke(self.agent, "debate", {
            "final_script_with_own_annotation": annotated,
            "peer_annotation": other,
            "shot_list": describe_shots(self.env),
        })
        self.reviews.append(document)
        return _dump(document)

    def revise(self, own: str, feedback: str) -> str:
        current = CameraAnnotationSet.from_document(json.loads(own), self.tag)
        revised, applied = apply_debate_feedback(current, json.loads(feedback), self.env)
        if applied:
            logger.info(f"{self.tag} adopted {applied} shot update(s)")
        self.annotations = revised
        return _dump(revised.to_document())


class DirectorJudge:
    """Director choosing between two finished annotation sets."""

    def __init__(self, crew: Crew, agent: RoleAgent, env: EnvironmentSpec, script: AnnotatedScript):
        self.crew = crew
        self.agent = agent
        self.tag = agent.tag
        self.env = env
        self.script = script

    def judge(
        self, history: DialogueHistory, position_p: str, position_q: str, feedback_p: str, feedback_q: str
    ) -> Judgment:
        document = self.crew.invoke(self.agent, "judge", {
            "final_script": script_document(self.script, scenes_only=True),
            "peer_annotation_1": position_p,
            "peer_annotation_2": position_q,
            "shot_list": describe_shots(self.env),
            "shot_annotation_requirements": SHOT_ANNOTATION_REQUIREMENTS,
        })
        winner = Peer.P if str(document["better"]).strip() == "1" else Peer.Q
        return Judgment(winner=winner, rationale=str(document.get("reason", "")))
