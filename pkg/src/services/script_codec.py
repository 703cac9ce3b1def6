"""
Script codec: parse, serialize, time and diff annotated scripts.
"""

import json
import logging
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from ..errors import ParseError, SchemaError
from ..models import AnnotatedScript, LineEvent, LineRevision, LineTiming, MoveEvent, Scene

logger = logging.getLogger(__name__)

ScriptDocument = Union[Dict[str, Any], List[Any]]


def schema_error(exc: ValidationError) -> SchemaError:
    """Convert the first pydantic error into a SchemaError naming the field path."""
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "script"
    if first["type"] == "missing":
        return SchemaError(field, f"missing required field '{field}'")
    return SchemaError(field, f"{field}: {first['msg']}")


def parse_document(document: Any) -> AnnotatedScript:
    """Build a script from an already-decoded document (object or bare scene list)."""
    if isinstance(document, list):
        document = {"scenes": document}
    if not isinstance(document, dict):
        raise SchemaError("scenes", "a script must be a JSON object or a list of scenes")
    try:
        return AnnotatedScript.model_validate(document)
    except ValidationError as exc:
        raise schema_error(exc)


def parse_script(text: str) -> AnnotatedScript:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, locus=f"line {exc.lineno} column {exc.colno}")
    return parse_document(document)


def script_document(script: AnnotatedScript, scenes_only: bool = False) -> ScriptDocument:
    """The on-disk shape. Excerpts without topic or profiles come back as a bare scene list."""
    document = script.model_dump(mode="json", by_alias=True, exclude_none=True)
    if scenes_only or (not script.topic and not script.profiles):
        return document["scenes"]
    return document


def serialize_script(script: AnnotatedScript, scenes_only: bool = False) -> str:
    return json.dumps(script_document(script, scenes_only), indent=4, ensure_ascii=False) + "\n"


def word_count(content: str) -> int:
    return len(content.split())


def estimate_durations(
    script: AnnotatedScript, rate: float, floor: float, move_duration: float = 3.0
) -> List[LineTiming]:
    """Per-event durations: lines last max(floor, words / rate), moves a fixed time."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    if floor <= 0:
        raise ValueError("floor must be positive")
    if move_duration <= 0:
        raise ValueError("move duration must be positive")

    timings = []
    for scene_index, scene in enumerate(script.scenes):
        for event_index, event in enumerate(scene.events):
            if isinstance(event, MoveEvent):
                duration = move_duration
            else:
                duration = max(floor, word_count(event.content) / rate)
            timings.append(LineTiming(scene_index=scene_index, event_index=event_index, duration=duration))
    return timings


def _line_view(line: Optional[LineEvent]) -> Dict[str, Any]:
    if line is None:
        return {}
    return {
        "speaker": line.speaker,
        "content": line.content,
        "actions": [{"character": a.character, "action": a.action} for a in line.actions],
    }


def line_revisions(before: AnnotatedScript, after: AnnotatedScript) -> List[LineRevision]:
    """Before/after pairs for every dialogue line whose text or actions changed."""
    revisions = []
    for scene_index in range(max(len(before.scenes), len(after.scenes))):
        old_lines = before.scenes[scene_index].lines() if scene_index < len(before.scenes) else []
        new_lines = after.scenes[scene_index].lines() if scene_index < len(after.scenes) else []
        for line_index in range(max(len(old_lines), len(new_lines))):
            old = _line_view(old_lines[line_index] if line_index < len(old_lines) else None)
            new = _line_view(new_lines[line_index] if line_index < len(new_lines) else None)
            if old != new:
                revisions.append(LineRevision(
                    scene_index=scene_index,
                    line_index=line_index,
                    speaker=(new or old)["speaker"],
                    before=old,
                    after=new,
                ))
    return revisions


def _moves_by_offset(scene: Scene) -> List[tuple]:
    """(number of lines before the move, move event document) for each move."""
    offsets = []
    lines_seen = 0
    for event in scene.events:
        if isinstance(event, MoveEvent):
            offsets.append((lines_seen, event.model_dump(mode="json", by_alias=True, exclude_none=True)))
        else:
            lines_seen += 1
    return offsets


def merge_revision(previous: AnnotatedScript, document: Any) -> AnnotatedScript:
    """Fold a screenwriter revision into the previous script.

    The revision may use the annotated-script shape (``scene``) or the dialogue-only
    correction shape (``dialogues``); in the latter case the previous version's moves
    are put back at their line offsets.
    """
    if isinstance(document, dict) and "scenes" in document:
        document = document["scenes"]
    if isinstance(document, dict):
        document = [document]
    if not isinstance(document, list):
        raise SchemaError("scenes", "a revision must be a list of scenes")

    scenes = []
    for index, revised in enumerate(document):
        if not isinstance(revised, dict):
            raise SchemaError(f"scenes.{index}", "each revised scene must be an object")
        old = previous.scenes[index] if index < len(previous.scenes) else None
        scene = {key: value for key, value in revised.items()
                 if key not in ("scene_information", "dialogues", "initial_position")}

        information = revised.get("scene information", revised.get("scene_information"))
        if information is None and old is not None:
            information = old.scene_information.model_dump(mode="json", by_alias=True)
        scene["scene information"] = information

        initial = revised.get("initial position", revised.get("initial_position"))
        if initial is None and old is not None:
            initial = [p.model_dump(mode="json") for p in old.initial_position]
        scene["initial position"] = initial or []

        if "scene" not in revised:
            lines = revised.get("dialogues")
            if lines is None:
                raise SchemaError(f"scenes.{index}.dialogues", f"missing required field 'scenes.{index}.dialogues'")
            moves = _moves_by_offset(old) if old is not None else []
            events: List[Any] = []
            for line_index, line in enumerate(lines):
                events.extend(move for offset, move in moves if offset == line_index)
                events.append(line)
            events.extend(move for offset, move in moves if offset >= len(lines))
            scene["scene"] = events
        scenes.append(scene)

    merged = {
        "topic": previous.topic,
        "profiles": [p.model_dump(mode="json", by_alias=True) for p in previous.profiles],
        "scenes": scenes,
    }
    return parse_document(merged)
