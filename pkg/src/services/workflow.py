"""
Production workflow.

Stages run in a fixed order: idea development, drafting, director review, actor
review, cinematography and assembly. Every stage persists its artifacts in the run
directory and advances the run state, so a failed run can be resumed from the last
completed stage.
"""

import json
import logging
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

from pydantic import ValidationError

from ..config import Settings
from ..errors import (
    ConstraintViolation,
    FilmCrewError,
    InsertionOutOfRange,
    ValidationGateFailed,
)
from ..models import (
    AnnotatedScript,
    CameraAnnotationSet,
    CharacterProfile,
    CollaborationMode,
    DialogueHistory,
    Diagnostic,
    EnvironmentSpec,
    FinalBundle,
    Gender,
    LocationSpec,
    Peer,
    Posture,
    Role,
    RoleAgent,
    RunState,
    Scene,
    SceneOutline,
    Severity,
    Stage,
)
from .agents import (
    AdoptedFeedbackCritic,
    Cinematographer,
    DirectorCritic,
    DirectorJudge,
    ScriptReviser,
)
from .camera import merge_shots
from .collaboration import critique_correct_verify, debate_judge
from .crew import Crew, TemplateLibrary, filter_actor_feedback
from .environment import describe_actions, describe_locations, describe_positions
from .provider import ChatProvider, LiveProvider, ReplayProvider
from .run_store import RunStore
from .script_codec import (
    estimate_durations,
    line_revisions,
    parse_document,
    parse_script,
    schema_error,
    script_document,
    serialize_script,
)
from .storyboard import count_lines, render_storyboard
from .transcript import TRANSCRIPT_FILE, Transcript, load_records
from .validator import (
    SHOT_RULES,
    apply_suggestions,
    has_errors,
    initial_postures,
    position_snapshots,
    settle_fixes,
    validate,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

PROFILES_FILE = "profiles.json"
OUTLINE_FILE = "outline.json"
DRAFT_FILE = "script_draft.json"
DIRECTOR_FILE = "script_v2.json"
ACTORS_FILE = "script_v3.json"
CCV_DIRECTOR_FILE = "ccv_director.json"
ACTOR_FEEDBACK_FILE = "actor_feedback.json"
CCV_ACTORS_FILE = "ccv_actors.json"
CAMERA_FILES = ("camera_1.json", "camera_2.json")
DEBATE_FILE = "debate.json"
ANNOTATED_FILE = "script_annotated.json"
FINAL_FILE = "script_final.json"
STORYBOARD_FILE = "storyboard.txt"
MANIFEST_FILE = "manifest.json"
REVISIONS_FILE = "revisions.json"

DIRECTOR_INSTRUCTION = "Revise the script until the director's feedback is fully addressed."
ACTORS_INSTRUCTION = "Revise the script to incorporate the actor suggestions the director adopted."
CAMERA_INSTRUCTION = "Choose one shot for every line and movement of the script."

_NUMBER = re.compile(r"-?\d+")


# Structural checks on director and screenwriter output

def _profile_problems(document: Any) -> List[str]:
    try:
        profiles = [CharacterProfile.model_validate(item) for item in document]
    except ValidationError as exc:
        return [schema_error(exc).message]
    names = [p.name for p in profiles]
    if len(set(names)) != len(names):
        return ["character names must be unique"]
    return []


def _outline_problems(document: Any) -> List[str]:
    try:
        [SceneOutline.model_validate(item) for item in document]
    except ValidationError as exc:
        return [schema_error(exc).message]
    return []


def outline_violations(
    outlines: Sequence[SceneOutline], profiles: Sequence[CharacterProfile], env: EnvironmentSpec
) -> List[ConstraintViolation]:
    """Planning constraints: known location, two or more characters, capacity, known characters."""
    known = {p.name for p in profiles}
    found = []
    for index, outline in enumerate(outlines):
        cast = outline.selected_characters
        location = env.location(outline.selected_location)
        if location is None:
            found.append(ConstraintViolation(
                "selected-location", f"scene {index}: '{outline.selected_location}' is not a known location"
            ))
        elif len(cast) > location.capacity:
            found.append(ConstraintViolation(
                "selected-characters",
                f"scene {index}: {len(cast)} characters exceed the capacity {location.capacity} of {location.name}",
            ))
        if len(cast) < 2:
            found.append(ConstraintViolation(
                "selected-characters", f"scene {index}: a scene needs at least two characters, got {len(cast)}"
            ))
        if len(set(cast)) != len(cast):
            found.append(ConstraintViolation("selected-characters", f"scene {index}: a character is listed twice"))
        strangers = [name for name in cast if name not in known]
        if strangers:
            found.append(ConstraintViolation(
                "selected-characters", f"scene {index}: no profile for {', '.join(strangers)}"
            ))
    return found


def _dialogue_problems(document: Any, outlines: Sequence[SceneOutline]) -> List[str]:
    if len(document) != len(outlines):
        return [f"expected dialogue for {len(outlines)} scene(s), got {len(document)}"]
    problems = []
    for index, (scene, outline) in enumerate(zip(document, outlines)):
        strangers = sorted({line["speaker"] for line in scene["scene-dialogue"]} - set(outline.selected_characters))
        if strangers:
            problems.append(f"scene {index}: {', '.join(strangers)} may not speak in this scene")
    return problems


def _placement_problems(
    document: Any, outlines: Sequence[SceneOutline], locations: Sequence[LocationSpec]
) -> List[str]:
    if len(document) != len(outlines):
        return [f"expected positions for {len(outlines)} scene(s), got {len(document)}"]
    problems = []
    for index, (scene, outline, location) in enumerate(zip(document, outlines, locations)):
        placed = [entry["character"] for entry in scene["scene-position"]]
        if sorted(placed) != sorted(outline.selected_characters):
            problems.append(f"scene {index}: place exactly {', '.join(outline.selected_characters)}")
        taken = set()
        for entry in scene["scene-position"]:
            position = location.position(entry["position"])
            if position is None:
                problems.append(f"scene {index}: '{entry['position']}' is not a position in {location.name}")
            elif position.id in taken:
                problems.append(f"scene {index}: {position.id} is assigned twice")
            else:
                taken.add(position.id)
    return problems


def _action_problems(document: Any, lines: Sequence[Dict[str, Any]], cast: Sequence[str]) -> List[str]:
    if len(document) != len(lines):
        return [f"expected actions for {len(lines)} line(s), got {len(document)}"]
    problems = []
    for index, (annotated, line) in enumerate(zip(document, lines)):
        if annotated["speaker"] != line["speaker"]:
            problems.append(f"line {index}: speaker should be {line['speaker']}")
        strangers = sorted({entry["character"] for entry in annotated["actions"]} - set(cast))
        if strangers:
            problems.append(f"line {index}: {', '.join(strangers)} is not in this scene")
    return problems


def _insertion_index(document: Dict[str, Any]) -> Optional[int]:
    match = _NUMBER.search(str(document.get("insertion", {}).get("insertion position", "")))
    return int(match.group()) if match else None


def _move_problems(document: Any, scene: Scene, location: LocationSpec) -> List[str]:
    move = document["move"]
    if isinstance(move, str):
        return []
    problems = []
    if move["character"] not in scene.who:
        problems.append(f"{move['character']} is not in this scene")
    if location.position(str(move["destination"])) is None:
        problems.append(f"'{move['destination']}' is not a position in {location.name}")
    if _insertion_index(document) is None:
        problems.append("insertion position must name a number")
    return problems


def attach_snapshots(script: AnnotatedScript, env: EnvironmentSpec) -> AnnotatedScript:
    """Recompute every event's "current position" from the derived state."""
    document = script.model_dump(mode="json", by_alias=True, exclude_none=True)
    for scene, scene_document in zip(script.scenes, document["scenes"]):
        snapshots = position_snapshots(scene, env)
        for event, snapshot in zip(scene_document["scene"], snapshots):
            event["current position"] = [entry.model_dump(mode="json") for entry in snapshot]
    return parse_document(document)


class Production:
    """One production run over a run directory."""

    def __init__(
        self,
        settings: Settings,
        env: EnvironmentSpec,
        library: TemplateLibrary,
        provider: ChatProvider,
        store: RunStore,
        state: RunState,
    ):
        self.settings = settings
        self.env = env
        self.provider = provider
        self.crew = Crew(provider, library, settings.json_attempts)
        self.store = store
        self.state = state
        self.mode = CollaborationMode(settings.collaboration_mode)
        # Replay serves per-agent queues in order; concurrency only pays off live.
        self.concurrent = settings.parallel_agents and not provider.deterministic

        self.director = self._agent(Role.DIRECTOR, "director")
        self.screenwriter = self._agent(Role.SCREENWRITER, "screenwriter")
        self.cinematographers = [self._agent(Role.CINEMATOGRAPHER, f"cinematographer-{n}") for n in (1, 2)]

        self.profiles: List[CharacterProfile] = []
        self.outlines: List[SceneOutline] = []
        self.draft: Optional[AnnotatedScript] = None
        self.script: Optional[AnnotatedScript] = None
        self.bundle: Optional[FinalBundle] = None
        self._written: List[str] = []

    def _agent(self, role: Role, tag: str, character: Optional[CharacterProfile] = None) -> RoleAgent:
        return RoleAgent(role=role, tag=tag, character=character, provider_config=self.settings.provider_config(role))

    def _warn(self, message: str) -> None:
        logger.warning(message)
        self.state.warnings.append(message)

    def _write_json(self, name: str, document: Any) -> None:
        self._written.append(self.store.write_json(name, document))

    def _write_text(self, name: str, text: str) -> None:
        self._written.append(self.store.write_text(name, text))

    def _map(self, step: Callable[[T], R], items: Sequence[T]) -> List[R]:
        if self.concurrent and len(items) > 1:
            with ThreadPoolExecutor(max_workers=len(items)) as pool:
                return list(pool.map(step, items))
        return [step(item) for item in items]

    # Stage 1: idea development

    def develop_idea(self, topic: str) -> Tuple[List[CharacterProfile], List[SceneOutline]]:
        document = self.crew.invoke(self.director, "plan_1", {"topic": topic}, schema_check=_profile_problems)
        profiles = [CharacterProfile.model_validate(item) for item in document]

        def names(gender: Gender) -> str:
            return ", ".join(p.name for p in profiles if p.gender is gender) or "None"

        variables = {
            "topic": topic,
            "male_characters": names(Gender.MALE),
            "female_characters": names(Gender.FEMALE),
            "location_list": describe_locations(self.env),
        }
        outlines = self._plan_scenes(variables, profiles)

        used = {name for outline in outlines for name in outline.selected_characters}
        unused = [p.name for p in profiles if p.name not in used]
        if unused:
            self._warn(f"Profiles used by no scene were dropped: {', '.join(unused)}")
        profiles = [p for p in profiles if p.name in used]

        self._write_json(PROFILES_FILE, [p.model_dump(mode="json", by_alias=True) for p in profiles])
        self._write_json(OUTLINE_FILE, [o.model_dump(mode="json", by_alias=True) for o in outlines])
        return profiles, outlines

    def _plan_scenes(self, variables: Dict[str, Any], profiles: List[CharacterProfile]) -> List[SceneOutline]:
        note = None
        violations: List[ConstraintViolation] = []
        for attempt in (1, 2):
            document = self.crew.invoke(self.director, "plan_2", variables, schema_check=_outline_problems, note=note)
            outlines = [SceneOutline.model_validate(item) for item in document]
            violations = outline_violations(outlines, profiles, self.env)
            if not violations:
                return [
                    o.model_copy(update={"selected_location": self.env.location(o.selected_location).name})
                    for o in outlines
                ]
            listed = "\n".join(f"- {v.message}" for v in violations)
            logger.warning(f"Scene plan broke {len(violations)} constraint(s) (attempt {attempt}/2)")
            note = f"The previous plan broke these constraints:\n{listed}\nProduce a plan that satisfies them."
        raise violations[0].tag(role=Role.DIRECTOR.value, template="prompt:plan_2")

    # Stage 2: drafting

    def draft_script(self, outlines: List[SceneOutline], profiles: List[CharacterProfile]) -> AnnotatedScript:
        outline_documents = [o.model_dump(mode="json", by_alias=True) for o in outlines]
        locations = [self.env.location(o.selected_location) for o in outlines]
        unique_locations = list({location.name: location for location in locations}.values())

        dialogues = self.crew.invoke(
            self.screenwriter, "script_1", {"scene_outline": outline_documents},
            schema_check=lambda document: _dialogue_problems(document, outlines),
        )
        placements = self.crew.invoke(self.screenwriter, "script_2", {
            "scene_outline": outline_documents,
            "position_description": "\n\n".join(describe_positions(location) for location in unique_locations),
        }, schema_check=lambda document: _placement_problems(document, outlines, locations))

        scenes = []
        for index, outline in enumerate(outlines):
            scenes.append(self._draft_scene(
                index, outline, outline_documents[index], locations[index],
                dialogues[index]["scene-dialogue"], placements[index]["scene-position"],
            ))

        script = parse_document({
            "topic": self.state.topic,
            "profiles": [p.model_dump(mode="json", by_alias=True) for p in profiles],
            "scenes": scenes,
        })
        self._write_text(DRAFT_FILE, serialize_script(script))
        return script

    def _draft_scene(
        self,
        index: int,
        outline: SceneOutline,
        outline_document: Dict[str, Any],
        location: LocationSpec,
        lines: List[Dict[str, Any]],
        placement: List[Dict[str, Any]],
    ) -> Dict[str, Any]:
        initial = [
            {"character": entry["character"], "position": location.position(entry["position"]).id}
            for entry in placement
        ]
        placed = ", ".join(
            f"{entry['character']}: {entry['position']}, "
            f"{'sittable' if location.position(entry['position']).sittable else 'unsittable'}, standing"
            for entry in initial
        )

        annotated = self.crew.invoke(self.screenwriter, "script_3", {
            "scene_outline": outline_document,
            "dialogue_draft": lines,
            "initial_position": placed,
            "action_list": describe_actions(self.env),
        }, schema_check=lambda document: _action_problems(document, lines, outline.selected_characters))

        events: List[Dict[str, Any]] = []
        for line in annotated:
            actions = []
            for entry in line["actions"]:
                action = {"character": entry["character"], "action": entry["action"]}
                if entry.get("state"):
                    action["state"] = entry["state"]
                actions.append(action)
            events.append({"speaker": line["speaker"], "content": line["content"], "actions": actions})

        document = {
            "scene information": {
                "who": outline.selected_characters,
                "where": location.name,
                "what": outline.story_plot,
            },
            "initial position": initial,
            "scene": events,
        }
        try:
            scene = Scene.model_validate(document)
        except ValidationError as exc:
            raise schema_error(exc).tag(role=Role.SCREENWRITER.value, template="prompt:script_3", scene=index)

        movable = [name for name, posture in initial_postures(scene).items() if posture is Posture.STANDING]
        slots: List[Any] = []
        for k, line in enumerate(lines):
            slots.append(f"<Insertion Position {k}>")
            slots.append({"speaker": line["speaker"], "content": line["content"]})
        slots.append(f"<Insertion Position {len(lines)}>")

        movement = self.crew.invoke(self.screenwriter, "script_4", {
            "characters_in_standing_state": ", ".join(movable) or "None",
            "position_description": describe_positions(location),
            "scene_outline": outline_document,
            "dialogue_with_insertion": slots,
            "initial_position": placed,
        }, schema_check=lambda response: _move_problems(response, scene, location))

        move = movement["move"]
        if not isinstance(move, str):
            slot = _insertion_index(movement)
            if not 0 <= slot <= len(events):
                raise InsertionOutOfRange(
                    f"scene {index}: insertion position {slot} is outside 0..{len(events)}",
                    role=Role.SCREENWRITER.value, template="prompt:script_4",
                )
            destination = location.position(str(move["destination"])).id
            events.insert(slot, {"move": {"character": move["character"], "destination": destination}})
            logger.info(f"Scene {index}: {move['character']} moves to {destination} at slot {slot}")
        return document

    # Stage 3: director review

    def revise_with_director(self, script: AnnotatedScript) -> AnnotatedScript:
        if self.mode is CollaborationMode.SOLO:
            logger.info("Solo mode: director review skipped")
            self._write_text(DIRECTOR_FILE, serialize_script(script))
            return script

        reviser = ScriptReviser(self.crew, self.screenwriter, self.env, script)
        critic = DirectorCritic(self.crew, self.director, self.env, script.topic)
        result = critique_correct_verify(
            reviser, critic,
            context=f"Film topic: {script.topic}",
            instruction=DIRECTOR_INSTRUCTION,
            max_rounds=self.settings.ccv_max_rounds,
            literal_loop_guard=self.settings.compat_loop_guard,
        )
        if not result.verified:
            self.state.warnings.append(f"director review ended unverified after {result.rounds} round(s)")
        self._write_json(CCV_DIRECTOR_FILE, result.model_dump(mode="json"))
        self._write_text(DIRECTOR_FILE, serialize_script(reviser.script))
        return reviser.script

    # Stage 4: actor review

    def revise_with_actors(self, script: AnnotatedScript) -> AnnotatedScript:
        if self.mode is CollaborationMode.SOLO:
            logger.info("Solo mode: actor review skipped")
            self._write_text(ACTORS_FILE, serialize_script(script))
            return script

        actors = [self._agent(Role.ACTOR, f"actor-{p.name}", character=p) for p in script.profiles]
        draft = script_document(script, scenes_only=True)

        def ask(actor: RoleAgent) -> Any:
            return self.crew.invoke(actor, "actor_feedback", {
                "character": actor.character.name,
                "character_profile": actor.character,
                "draft_script": draft,
            })

        report: Dict[str, Any] = {}
        suggestions: List[Dict[str, Any]] = []
        for actor, entries in zip(actors, self._map(ask, actors)):
            kept, dropped = filter_actor_feedback(entries, actor.character.name, script)
            if dropped:
                self.state.warnings.append(f"dropped {len(dropped)} feedback entr(y/ies) from {actor.tag}")
            report[actor.tag] = {"kept": kept, "dropped": dropped}
            suggestions.extend(kept)

        record: Dict[str, Any] = {"feedback": report, "decision": None}
        if not suggestions:
            logger.info("No usable actor feedback; script unchanged")
            self._write_json(ACTOR_FEEDBACK_FILE, record)
            self._write_text(ACTORS_FILE, serialize_script(script))
            return script

        decision = self.crew.invoke(self.director, "director_filter", {
            "character_profiles": script.profiles,
            "draft_script": draft,
            "actor_critique": suggestions,
        })
        record["decision"] = decision
        self._write_json(ACTOR_FEEDBACK_FILE, record)

        adopted = decision["adopted-suggestions"]
        if not isinstance(adopted, list) or not adopted:
            logger.info("Director adopted none of the actor suggestions")
            self._write_text(ACTORS_FILE, serialize_script(script))
            return script

        logger.info(f"Director adopted {len(adopted)} actor suggestion(s)")
        reviser = ScriptReviser(self.crew, self.screenwriter, self.env, script)
        critic = AdoptedFeedbackCritic(self.crew, self.director, json.dumps(adopted, indent=4, ensure_ascii=False))
        result = critique_correct_verify(
            reviser, critic,
            context=f"Film topic: {script.topic}",
            instruction=ACTORS_INSTRUCTION,
            max_rounds=self.settings.ccv_max_rounds,
            literal_loop_guard=self.settings.compat_loop_guard,
        )
        if not result.verified:
            self.state.warnings.append(f"actor review ended unverified after {result.rounds} round(s)")
        self._write_json(CCV_ACTORS_FILE, result.model_dump(mode="json"))
        self._write_text(ACTORS_FILE, serialize_script(reviser.script))
        return reviser.script

    # Stage 5: cinematography

    def annotate_cameras(self, script: AnnotatedScript) -> AnnotatedScript:
        history = DialogueHistory.start(f"Film topic: {script.topic}", CAMERA_INSTRUCTION)
        if self.mode is CollaborationMode.SOLO:
            peer = Cinematographer(self.crew, self.cinematographers[0], self.env, script)
            peer.respond(history)
            winning = peer.annotations
            self._write_json(CAMERA_FILES[0], winning.to_document())
        else:
            peers = [Cinematographer(self.crew, agent, self.env, script) for agent in self.cinematographers]
            judge = DirectorJudge(self.crew, self.director, self.env, script)
            result = debate_judge(
                peers[0], peers[1], judge,
                context=history.context,
                instruction=history.instruction,
                rounds=self.settings.debate_rounds,
                concurrent=self.concurrent,
            )
            self._write_json(CAMERA_FILES[0], json.loads(result.position_p))
            self._write_json(CAMERA_FILES[1], json.loads(result.position_q))
            self._write_json(DEBATE_FILE, result.model_dump(mode="json"))
            author = peers[0].tag if result.judgment.winner is Peer.P else peers[1].tag
            winning = CameraAnnotationSet.from_document(json.loads(result.winning_position), author)

        annotated = self._gate(merge_shots(script, winning))
        self._write_text(ANNOTATED_FILE, serialize_script(annotated))
        return annotated

    def _gate(self, script: AnnotatedScript) -> AnnotatedScript:
        """One automatic pass over fixable shot errors, then zero errors or a hard failure."""
        limit = self.settings.static_repeat_limit
        diagnostics = validate(script, self.env, limit)
        fixable = [d for d in diagnostics if d.is_error and d.rule in SHOT_RULES and d.fixes]
        if fixable:
            logger.info(f"Applying fixes for {len(fixable)} shot error(s)")
            script = apply_suggestions(script, settle_fixes(fixable))
            diagnostics = validate(script, self.env, limit)
        blocking = [d for d in diagnostics if d.is_error]
        if blocking:
            raise ValidationGateFailed(blocking)
        warnings = sum(1 for d in diagnostics if d.severity is Severity.WARNING)
        if warnings:
            logger.info(f"Validation gate passed with {warnings} warning(s)")
        return script

    # Stage 6: assembly

    def assemble(self, script: AnnotatedScript) -> FinalBundle:
        limit = self.settings.static_repeat_limit
        spelling = [d for d in validate(script, self.env, limit) if d.severity is Severity.INFO and d.fixes]
        final = attach_snapshots(apply_suggestions(script, spelling), self.env)

        diagnostics = validate(final, self.env, limit)
        if has_errors(diagnostics):
            raise ValidationGateFailed([d for d in diagnostics if d.is_error])

        timings = estimate_durations(
            final, self.settings.words_per_second, self.settings.duration_floor, self.settings.move_duration
        )
        storyboard = render_storyboard(final, timings)
        manifest = self._manifest(final, timings, diagnostics)

        self._write_text(FINAL_FILE, serialize_script(final, scenes_only=True))
        self._write_text(STORYBOARD_FILE, storyboard)
        if self.draft is not None:
            self._write_json(REVISIONS_FILE, [r.model_dump(mode="json") for r in line_revisions(self.draft, final)])
        self._write_json(MANIFEST_FILE, manifest)
        return FinalBundle(
            script=final, timings=timings, storyboard=storyboard, manifest=manifest,
            diagnostics=diagnostics, run_dir=str(self.store.run_dir),
        )

    def _manifest(self, script: AnnotatedScript, timings: List[Any], diagnostics: List[Diagnostic]) -> Dict[str, Any]:
        severities = Counter(d.severity.value for d in diagnostics)
        # Written before the driver records this stage.
        stage_calls = dict(self.state.stage_calls)
        stage_calls[Stage.ASSEMBLED.value] = len(self.provider.transcript) - self.state.call_count
        return {
            "run_id": self.state.run_id,
            "topic": self.state.topic,
            "mode": self.mode.value,
            "provider": "replay" if self.provider.deterministic else "live",
            "model_name": self.settings.model_name,
            "config": self.state.config_snapshot,
            "stage_calls": stage_calls,
            "total_calls": len(self.provider.transcript),
            "validator": {
                "errors": severities.get(Severity.ERROR.value, 0),
                "warnings": severities.get(Severity.WARNING.value, 0),
                "info": severities.get(Severity.INFO.value, 0),
            },
            "scenes": len(script.scenes),
            "lines": count_lines(script),
            "running_time": round(sum(t.duration for t in timings), 2),
            "warnings": list(self.state.warnings),
        }

    # Driver

    def _run_stage(self, stage: Stage) -> None:
        if stage is Stage.IDEA:
            self.profiles, self.outlines = self.develop_idea(self.state.topic)
        elif stage is Stage.SCRIPT1:
            self.draft = self.script = self.draft_script(self.outlines, self.profiles)
        elif stage is Stage.SCRIPT2:
            self.script = self.revise_with_director(self.script)
        elif stage is Stage.SCRIPT3:
            self.script = self.revise_with_actors(self.script)
        elif stage is Stage.CINEMA:
            self.script = self.annotate_cameras(self.script)
        elif stage is Stage.ASSEMBLED:
            self.bundle = self.assemble(self.script)

    def _restore(self) -> None:
        """Reload in-memory artifacts of the stages already completed."""
        state = self.state
        try:
            if state.is_complete(Stage.IDEA):
                self.profiles = [CharacterProfile.model_validate(p) for p in self.store.read_json(PROFILES_FILE)]
                self.outlines = [SceneOutline.model_validate(o) for o in self.store.read_json(OUTLINE_FILE)]
        except ValidationError as exc:
            raise schema_error(exc).tag(stage=Stage.IDEA.value)
        if state.is_complete(Stage.SCRIPT1):
            self.draft = self.script = parse_document(self.store.read_json(DRAFT_FILE))
        for stage, name in ((Stage.SCRIPT2, DIRECTOR_FILE), (Stage.SCRIPT3, ACTORS_FILE), (Stage.CINEMA, ANNOTATED_FILE)):
            if state.is_complete(stage):
                self.script = parse_document(self.store.read_json(name))
        if state.is_complete(Stage.ASSEMBLED):
            final = parse_script(self.store.read_text(FINAL_FILE))
            timings = estimate_durations(
                final, self.settings.words_per_second, self.settings.duration_floor, self.settings.move_duration
            )
            self.bundle = FinalBundle(
                script=final, timings=timings,
                storyboard=self.store.read_text(STORYBOARD_FILE),
                manifest=self.store.read_json(MANIFEST_FILE),
                run_dir=str(self.store.run_dir),
            )

    def run(self) -> FinalBundle:
        """Run every stage not yet completed, persisting state after each one."""
        self._restore()
        if self.state.stage is not None:
            logger.info(f"Resuming run {self.state.run_id} after stage {self.state.stage.value}")
        self.store.save_state(self.state)

        while True:
            stage = self.state.next_stage()
            if stage is None:
                break
            logger.info(f"Stage {stage.value} started")
            self._written = []
            try:
                self._run_stage(stage)
            except FilmCrewError as exc:
                self.store.save_state(self.state)
                raise exc.tag(stage=stage.value)
            self.state.advance(stage, self._written, len(self.provider.transcript))
            self.store.save_state(self.state)
            logger.info(f"Stage {stage.value} completed with {self.state.stage_calls[stage.value]} call(s)")
        return self.bundle


def open_run(
    settings: Settings,
    topic: Optional[str] = None,
    run_dir: Optional[Union[str, Path]] = None,
    resume: Optional[Union[str, Path]] = None,
) -> Tuple[RunStore, RunState, Transcript]:
    """Create a fresh run directory, or reopen one to resume it.

    A resumed transcript keeps only the calls of completed stages.
    """
    if resume is not None:
        store = RunStore(resume)
        state = store.load_state()
        transcript = Transcript.load(store.run_dir / TRANSCRIPT_FILE, keep=state.call_count)
        return store, state, transcript

    if not topic:
        raise ConstraintViolation("topic", "a topic is required to start a production")
    state = RunState(
        topic=topic,
        config_snapshot=settings.cli_config().model_dump(mode="json"),
    )
    store = RunStore(run_dir) if run_dir is not None else RunStore.for_run(settings.runs_directory, state)
    return store, state, Transcript(path=store.run_dir / TRANSCRIPT_FILE)


def make_provider(
    settings: Settings, transcript: Transcript, replay: Optional[Union[str, Path]] = None
) -> ChatProvider:
    """Replay provider when a fixture is given, otherwise the live client."""
    if replay is not None:
        return ReplayProvider(load_records(replay), transcript, skip=transcript.counts_by_tag())
    return LiveProvider(settings.provider_config(), transcript)
