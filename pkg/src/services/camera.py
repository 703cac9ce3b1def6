"""
Camera annotation sets: merging shots into a script and applying debate updates.
"""

import logging
from typing import Any, Dict, Tuple

from ..errors import MergeArityMismatch
from ..models import AnnotatedScript, CameraAnnotationSet, EnvironmentSpec, ShotChoice, ordered_items
from .script_codec import parse_document

logger = logging.getLogger(__name__)

_NO_UPDATE = {"", "none", "null", "n/a"}


def as_flag(value: Any) -> bool:
    """Read a model's yes/no field, which arrives as a bool or as "True"/"False"."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return value != 0
    return str(value).strip().casefold() in ("true", "yes", "1")


def merge_shots(script: AnnotatedScript, annotations: CameraAnnotationSet) -> AnnotatedScript:
    """Put one shot on every event. Counts must match scene by scene."""
    if len(annotations.scenes) != len(script.scenes):
        raise MergeArityMismatch(
            f"{annotations.author} annotated {len(annotations.scenes)} scene(s); "
            f"the script has {len(script.scenes)}"
        )
    document = script.model_dump(mode="json", by_alias=True, exclude_none=True)
    for index, (scene, choices) in enumerate(zip(document["scenes"], annotations.scenes)):
        events = scene["scene"]
        if len(choices) != len(events):
            raise MergeArityMismatch(
                f"scene {index}: {annotations.author} chose {len(choices)} shot(s) "
                f"for {len(events)} event(s)"
            )
        for event, choice in zip(events, choices):
            event["shot"] = choice.shot
    return parse_document(document)


def apply_debate_feedback(
    annotations: CameraAnnotationSet, feedback: Dict[str, Any], env: EnvironmentSpec
) -> Tuple[CameraAnnotationSet, int]:
    """Apply every entry of a peer review marked "need update" whose updated shot is in the catalog.

    Returns the revised set and the number of shots changed.
    """
    scenes = [list(choices) for choices in annotations.scenes]
    applied = 0
    for s, (_, shots) in enumerate(ordered_items(feedback)):
        if s >= len(scenes) or not isinstance(shots, dict):
            continue
        for k, (key, entry) in enumerate(ordered_items(shots)):
            if k >= len(scenes[s]) or not isinstance(entry, dict) or not as_flag(entry.get("need update")):
                continue
            updated = str(entry.get("updated shot") or "").strip()
            if updated.casefold() in _NO_UPDATE:
                continue
            spec = env.lookup_shot(updated)
            if spec is None:
                logger.warning(f"Ignoring update of scene {s} {key} to unknown shot '{updated}'")
                continue
            if spec.canonical_name != scenes[s][k].shot:
                scenes[s][k] = ShotChoice(shot=spec.canonical_name, reasoning=str(entry.get("reasoning", "")))
                applied += 1
    return CameraAnnotationSet(author=annotations.author, scenes=scenes), applied
