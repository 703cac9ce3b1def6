"""
Script validator: the posture state machine, occupancy checks and the shot-usage grammar.

Every rule reports a Diagnostic; nothing here raises for a bad script. Findings come
back ordered by (scene, event, rule).
"""

import logging
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

from ..errors import ConflictingSuggestions, UnknownPosition
from ..models import (
    AnnotatedScript,
    CharacterPosition,
    CharacterState,
    Diagnostic,
    EnvironmentSpec,
    FixTarget,
    LineEvent,
    LocationSpec,
    MoveEvent,
    Posture,
    RuleId,
    Scene,
    Severity,
    ShotKind,
    ShotSpec,
    StateEffect,
)
from .environment import counterpart_action, suggest_action, suggest_shot
from .script_codec import parse_document

logger = logging.getLogger(__name__)

DEFAULT_STATIC_REPEAT_LIMIT = 3

LONG_SHOT = "Long Shot"
MEDIUM_SHOT = "Medium Shot"
CLOSE_UP_SHOT = "Close-up Shot"
PAN_SHOT = "Pan Shot"
CURVE_SURROUND_SHOT = "Curve Surround Shot"

ALTERNATE_STATIC = {
    MEDIUM_SHOT: CLOSE_UP_SHOT,
    CLOSE_UP_SHOT: MEDIUM_SHOT,
    LONG_SHOT: MEDIUM_SHOT,
}

SHOT_RULES = frozenset({
    RuleId.UNKNOWN_SHOT,
    RuleId.OPENING_SHOT_RULE,
    RuleId.ZOOM_NEEDS_LONG,
    RuleId.TRUCK_ONLY_OPENING,
    RuleId.TRACKING_NEEDS_MOTION,
    RuleId.PAN_RUN_RULE,
    RuleId.CURVE_SURROUND_FIRST_APPEARANCE,
    RuleId.CONSECUTIVE_STATIC_REPEAT,
})

StateTrace = Dict[str, List[CharacterState]]


def _diagnostic(
    rule: RuleId,
    severity: Severity,
    scene: int,
    event: Optional[int],
    message: str,
    suggestion: Optional[str] = None,
    fixes: Iterable[Tuple[int, str, str]] = (),
) -> Diagnostic:
    return Diagnostic(
        rule=rule,
        severity=severity,
        scene_index=scene,
        event_index=event,
        message=message,
        suggestion=suggestion,
        fixes=[FixTarget(scene_index=scene, event_index=e, field=f, value=v) for e, f, v in fixes],
    )


# Posture and position state

def initial_postures(scene: Scene) -> Dict[str, Posture]:
    """Everyone starts standing unless their first ``state`` annotation says sitting."""
    postures = {name: Posture.STANDING for name in scene.who}
    decided: Set[str] = set()
    for line in scene.lines():
        for entry in line.actions:
            if entry.character in decided or entry.state is None:
                continue
            decided.add(entry.character)
            postures[entry.character] = entry.state
    return postures


def derive_state_trace(scene: Scene, env: EnvironmentSpec) -> StateTrace:
    """Replay moves and posture changes.

    Each character gets len(events) + 1 states: the initial one, then one after
    every event.
    """
    location = env.location(scene.location)
    if location is None:
        raise UnknownPosition(f"unknown location '{scene.location}'")

    positions: Dict[str, Optional[str]] = {name: None for name in scene.who}
    for entry in scene.initial_position:
        position = location.position(entry.position)
        if position is None:
            raise UnknownPosition(f"'{entry.position}' is not a position in {location.name}")
        positions[entry.character] = position.id
    postures = initial_postures(scene)

    def snapshot() -> Dict[str, CharacterState]:
        return {name: CharacterState(position=positions[name], posture=postures[name]) for name in scene.who}

    trace: StateTrace = {name: [state] for name, state in snapshot().items()}
    for index, event in enumerate(scene.events):
        if isinstance(event, MoveEvent):
            destination = location.position(event.move.destination)
            if destination is None:
                raise UnknownPosition(
                    f"event {index}: '{event.move.destination}' is not a position in {location.name}"
                )
            positions[event.move.character] = destination.id
        else:
            # Only actions the validator accepts change posture.
            acted: Set[str] = set()
            for entry in event.actions:
                name = entry.character
                if name in acted:
                    continue
                acted.add(name)
                spec = env.lookup_action(entry.action)
                if spec is None or spec.required_state is not postures.get(name, Posture.STANDING):
                    continue
                if spec.state_effect is StateEffect.TO_SITTING:
                    seat = location.position(positions[name]) if positions.get(name) else None
                    if seat is not None and seat.sittable:
                        postures[name] = Posture.SITTING
                elif spec.state_effect is StateEffect.TO_STANDING:
                    postures[name] = Posture.STANDING
        for name, state in snapshot().items():
            trace[name].append(state)
    return trace


def position_snapshots(scene: Scene, env: EnvironmentSpec) -> List[List[CharacterPosition]]:
    """For each event, where everyone stands just before it happens."""
    trace = derive_state_trace(scene, env)
    snapshots = []
    for index in range(len(scene.events)):
        snapshots.append([
            CharacterPosition(character=name, position=trace[name][index].position)
            for name in scene.who
            if trace[name][index].position is not None
        ])
    return snapshots


# Rules

def validate(
    script: AnnotatedScript,
    env: EnvironmentSpec,
    static_repeat_limit: int = DEFAULT_STATIC_REPEAT_LIMIT,
) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    seen_subjects: Set[str] = set()
    for index, scene in enumerate(script.scenes):
        diagnostics.extend(_check_state(index, scene, env))
        diagnostics.extend(_check_shots(index, scene, env, seen_subjects, static_repeat_limit))
    diagnostics.sort(key=lambda d: d.sort_key)
    logger.debug(f"Validation finished with {len(diagnostics)} finding(s)")
    return diagnostics


def _check_state(s: int, scene: Scene, env: EnvironmentSpec) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    location = env.location(scene.location)
    if location is None:
        found.append(_diagnostic(
            RuleId.UNKNOWN_POSITION, Severity.ERROR, s, None,
            f"unknown location '{scene.location}'",
        ))
        return found

    if len(scene.who) > location.capacity:
        found.append(_diagnostic(
            RuleId.CAPACITY_EXCEEDED, Severity.ERROR, s, None,
            f"{len(scene.who)} characters exceed the capacity {location.capacity} of {location.name}",
        ))

    positions: Dict[str, str] = {}
    for entry in scene.initial_position:
        position = location.position(entry.position)
        if position is None:
            found.append(_diagnostic(
                RuleId.UNKNOWN_POSITION, Severity.ERROR, s, None,
                f"initial position '{entry.position}' of {entry.character} is not in {location.name}",
            ))
            continue
        positions[entry.character] = position.id
    postures = initial_postures(scene)

    for e, event in enumerate(scene.events):
        if event.current_position is not None:
            found.extend(_check_snapshot(s, e, event.current_position, positions, location))

        if isinstance(event, MoveEvent):
            found.extend(_apply_move(s, e, event, positions, postures, location))
        else:
            found.extend(_apply_line(s, e, event, positions, postures, location, env))
    return found


def _check_snapshot(
    s: int, e: int, snapshot: List[CharacterPosition], positions: Dict[str, str], location: LocationSpec
) -> List[Diagnostic]:
    found = []
    for entry in snapshot:
        derived = positions.get(entry.character)
        stated = location.position(entry.position)
        if derived is None or stated is None or stated.id != derived:
            found.append(_diagnostic(
                RuleId.POSITION_SNAPSHOT_MISMATCH, Severity.WARNING, s, e,
                f"current position says {entry.character} is at {entry.position}, "
                f"derived state says {derived or 'unplaced'}",
                suggestion=derived,
            ))
    return found


def _apply_move(
    s: int,
    e: int,
    event: MoveEvent,
    positions: Dict[str, str],
    postures: Dict[str, Posture],
    location: LocationSpec,
) -> List[Diagnostic]:
    found = []
    mover = event.move.character
    if postures.get(mover) is Posture.SITTING:
        found.append(_diagnostic(
            RuleId.STATE_MISMATCH, Severity.ERROR, s, e,
            f"{mover} is sitting and must Stand Up before moving",
            suggestion="Stand Up",
        ))

    destination = location.position(event.move.destination)
    if destination is None:
        found.append(_diagnostic(
            RuleId.UNKNOWN_POSITION, Severity.ERROR, s, e,
            f"destination '{event.move.destination}' is not a position in {location.name}",
        ))
        return found

    occupant = next(
        (name for name, pos in positions.items() if pos == destination.id and name != mover), None
    )
    if occupant is not None:
        found.append(_diagnostic(
            RuleId.POSITION_COLLISION, Severity.ERROR, s, e,
            f"{mover} moves to {destination.id}, already occupied by {occupant}",
        ))
    positions[mover] = destination.id
    return found


def _apply_line(
    s: int,
    e: int,
    event: LineEvent,
    positions: Dict[str, str],
    postures: Dict[str, Posture],
    location: LocationSpec,
    env: EnvironmentSpec,
) -> List[Diagnostic]:
    found = []
    acted: Set[str] = set()
    for k, entry in enumerate(event.actions):
        name = entry.character
        if name in acted:
            found.append(_diagnostic(
                RuleId.DOUBLE_ACTION, Severity.ERROR, s, e,
                f"{name} already has an action on this line; '{entry.action}' is a second one",
            ))
            continue
        acted.add(name)
        posture = postures.get(name, Posture.STANDING)

        if entry.state is not None and entry.state is not posture:
            found.append(_diagnostic(
                RuleId.ILLEGAL_STATE_CHANGE, Severity.ERROR, s, e,
                f"{name} is annotated as {entry.state.value} but is {posture.value}; "
                f"only Sit Down and Stand Up change posture",
                fixes=[(e, f"actions.{k}.state", posture.value)],
            ))

        spec = env.lookup_action(entry.action)
        if spec is None:
            suggestion = suggest_action(entry.action, env)
            found.append(_diagnostic(
                RuleId.UNKNOWN_ACTION, Severity.ERROR, s, e,
                f"unknown action '{entry.action}' for {name}",
                suggestion=suggestion,
                fixes=[(e, f"actions.{k}.action", suggestion)] if suggestion else [],
            ))
            continue
        if spec.canonical_name != entry.action:
            found.append(_diagnostic(
                RuleId.UNKNOWN_ACTION, Severity.INFO, s, e,
                f"'{entry.action}' is spelled '{spec.canonical_name}' in the catalog",
                suggestion=spec.canonical_name,
                fixes=[(e, f"actions.{k}.action", spec.canonical_name)],
            ))

        if spec.required_state is not posture:
            suggestion = counterpart_action(spec, posture, env)
            found.append(_diagnostic(
                RuleId.STATE_MISMATCH, Severity.ERROR, s, e,
                f"'{spec.canonical_name}' needs a {spec.required_state.value} character; "
                f"{name} is {posture.value}",
                suggestion=suggestion,
                fixes=[(e, f"actions.{k}.action", suggestion)] if suggestion else [],
            ))
            continue

        if spec.state_effect is StateEffect.TO_SITTING:
            position = location.position(positions[name]) if name in positions else None
            if position is None or not position.sittable:
                found.append(_diagnostic(
                    RuleId.SIT_UNSITTABLE, Severity.ERROR, s, e,
                    f"{name} cannot Sit Down at {positions.get(name, 'an unknown position')}",
                ))
                continue
            postures[name] = Posture.SITTING
        elif spec.state_effect is StateEffect.TO_STANDING:
            postures[name] = Posture.STANDING
    return found


def _check_shots(
    s: int,
    scene: Scene,
    env: EnvironmentSpec,
    seen_subjects: Set[str],
    static_repeat_limit: int,
) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    events = scene.events
    specs: List[Optional[ShotSpec]] = []

    for e, event in enumerate(events):
        spec = env.lookup_shot(event.shot) if event.shot is not None else None
        specs.append(spec)
        if event.shot is None:
            continue
        if spec is None:
            suggestion = suggest_shot(event.shot, env)
            found.append(_diagnostic(
                RuleId.UNKNOWN_SHOT, Severity.ERROR, s, e,
                f"unknown shot '{event.shot}'",
                suggestion=suggestion,
                fixes=[(e, "shot", suggestion)] if suggestion else [],
            ))
        elif spec.canonical_name != event.shot:
            found.append(_diagnostic(
                RuleId.UNKNOWN_SHOT, Severity.INFO, s, e,
                f"'{event.shot}' is spelled '{spec.canonical_name}' in the catalog",
                suggestion=spec.canonical_name,
                fixes=[(e, "shot", spec.canonical_name)],
            ))

    for e, (event, spec) in enumerate(zip(events, specs)):
        if spec is not None:
            found.extend(_shot_usage(s, e, event, spec, specs, seen_subjects))
        seen_subjects.add(event.subject)

    found.extend(_pan_runs(s, events, specs))
    found.extend(_static_runs(s, specs, static_repeat_limit))
    return found


def _shot_usage(
    s: int,
    e: int,
    event: Any,
    spec: ShotSpec,
    specs: List[Optional[ShotSpec]],
    seen_subjects: Set[str],
) -> List[Diagnostic]:
    found = []
    name = spec.canonical_name

    # A scene that opens with a move may open on a movement shot.
    if e == 0 and isinstance(event, LineEvent) and not spec.has_rule(RuleId.OPENING_SHOT_RULE):
        found.append(_diagnostic(
            RuleId.OPENING_SHOT_RULE, Severity.ERROR, s, e,
            f"a scene that opens with dialogue must open on a Truck Shot or a Long Shot, not {name}",
            suggestion=LONG_SHOT,
            fixes=[(e, "shot", LONG_SHOT)],
        ))

    if spec.has_rule(RuleId.ZOOM_NEEDS_LONG):
        if e == 0:
            found.append(_diagnostic(
                RuleId.ZOOM_NEEDS_LONG, Severity.ERROR, s, e,
                f"{name} cannot open a scene; it must follow a Long Shot",
                suggestion=LONG_SHOT,
                fixes=[(e, "shot", LONG_SHOT)],
            ))
        elif specs[e - 1] is not None and specs[e - 1].canonical_name != LONG_SHOT:
            found.append(_diagnostic(
                RuleId.ZOOM_NEEDS_LONG, Severity.ERROR, s, e,
                f"{name} follows {specs[e - 1].canonical_name}; the preceding shot must be a Long Shot",
                suggestion=LONG_SHOT,
                fixes=[(e - 1, "shot", LONG_SHOT)],
            ))

    if spec.has_rule(RuleId.TRUCK_ONLY_OPENING) and e != 0:
        found.append(_diagnostic(
            RuleId.TRUCK_ONLY_OPENING, Severity.ERROR, s, e,
            f"{name} may only be the opening shot of a scene",
            suggestion=LONG_SHOT,
            fixes=[(e, "shot", LONG_SHOT)],
        ))

    if spec.has_rule(RuleId.TRACKING_NEEDS_MOTION) and isinstance(event, LineEvent):
        found.append(_diagnostic(
            RuleId.TRACKING_NEEDS_MOTION, Severity.ERROR, s, e,
            f"{name} is not applicable as {event.speaker} is not moving",
            suggestion=MEDIUM_SHOT,
            fixes=[(e, "shot", MEDIUM_SHOT)],
        ))

    if spec.has_rule(RuleId.CURVE_SURROUND_FIRST_APPEARANCE) and event.subject in seen_subjects:
        if name == CURVE_SURROUND_SHOT:
            found.append(_diagnostic(
                RuleId.CURVE_SURROUND_FIRST_APPEARANCE, Severity.ERROR, s, e,
                f"{name} is reserved for a character's first appearance; {event.subject} appeared earlier",
                suggestion=MEDIUM_SHOT,
                fixes=[(e, "shot", MEDIUM_SHOT)],
            ))
        else:
            found.append(_diagnostic(
                RuleId.CURVE_SURROUND_FIRST_APPEARANCE, Severity.INFO, s, e,
                f"{name} on {event.subject}, who appeared earlier, only fits a tense moment",
            ))
    return found


def _pan_runs(s: int, events: List[Any], specs: List[Optional[ShotSpec]]) -> List[Diagnostic]:
    found = []
    is_pan = [spec is not None and spec.has_rule(RuleId.PAN_RUN_RULE) for spec in specs]
    for e, pan in enumerate(is_pan):
        if not pan or not isinstance(events[e], LineEvent):
            continue
        lone = not (e > 0 and is_pan[e - 1]) and not (e + 1 < len(is_pan) and is_pan[e + 1])
        if lone:
            neighbours = [n for n in (e - 1, e + 1) if 0 < n < len(events)]
            found.append(_diagnostic(
                RuleId.PAN_RUN_RULE, Severity.WARNING, s, e,
                "a Pan Shot during dialogue should be used several times in a row",
                suggestion=PAN_SHOT if neighbours else None,
                fixes=[(n, "shot", PAN_SHOT) for n in neighbours],
            ))
    return found


def _static_runs(s: int, specs: List[Optional[ShotSpec]], limit: int) -> List[Diagnostic]:
    found = []
    start = 0
    while start < len(specs):
        spec = specs[start]
        end = start + 1
        if spec is not None and spec.kind is ShotKind.STATIC:
            while end < len(specs) and specs[end] is not None and specs[end].canonical_name == spec.canonical_name:
                end += 1
            if end - start > limit:
                flagged = start + limit
                alternate = ALTERNATE_STATIC.get(spec.canonical_name, MEDIUM_SHOT)
                fixes = []
                if flagged - 2 > start:
                    fixes.extend([(flagged - 2, "shot", PAN_SHOT), (flagged - 1, "shot", PAN_SHOT)])
                fixes.append((flagged, "shot", alternate))
                found.append(_diagnostic(
                    RuleId.CONSECUTIVE_STATIC_REPEAT, Severity.WARNING, s, flagged,
                    f"{end - start} consecutive {spec.canonical_name}s might make the scene feel dull",
                    suggestion=alternate,
                    fixes=fixes,
                ))
        start = end
    return found


# Fixes

def _set_path(target: Dict[str, Any], path: str, value: str) -> None:
    parts = path.split(".")
    node: Any = target
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    node[parts[-1]] = value


def settle_fixes(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    """Drop fixes that contradict an earlier diagnostic's fix for the same field.

    Diagnostics are taken in report order, so for one event the rule declared
    first wins (an opening-shot fix beats a tracking or curve-surround fix).
    """
    chosen: Dict[Tuple[int, int, str], str] = {}
    settled = []
    for diagnostic in sorted(diagnostics, key=lambda d: d.sort_key):
        kept = []
        for fix in diagnostic.fixes:
            key = (fix.scene_index, fix.event_index, fix.field)
            if chosen.setdefault(key, fix.value) != fix.value:
                logger.debug(f"{diagnostic.rule.value} fix '{fix.value}' dropped for '{chosen[key]}' at {key}")
                continue
            kept.append(fix)
        if len(kept) != len(diagnostic.fixes):
            diagnostic = diagnostic.model_copy(update={"fixes": kept})
        settled.append(diagnostic)
    return settled


def apply_suggestions(script: AnnotatedScript, diagnostics: Iterable[Diagnostic]) -> AnnotatedScript:
    """Return a copy of the script with every diagnostic's fixes applied.

    Diagnostics without fixes are ignored. Two fixes giving one field different
    values raise ConflictingSuggestions.
    """
    edits: Dict[Tuple[int, int, str], str] = {}
    for diagnostic in diagnostics:
        for fix in diagnostic.fixes:
            key = (fix.scene_index, fix.event_index, fix.field)
            if key in edits and edits[key] != fix.value:
                raise ConflictingSuggestions(
                    f"scene {key[0]} event {key[1]} field '{key[2]}' has two suggested values: "
                    f"'{edits[key]}' and '{fix.value}'"
                )
            edits[key] = fix.value
    if not edits:
        return script

    document = script.model_dump(mode="json", by_alias=True, exclude_none=True)
    for (scene, event, field), value in sorted(edits.items()):
        _set_path(document["scenes"][scene]["scene"][event], field, value)
    logger.info(f"Applied {len(edits)} suggested fix(es)")
    return parse_document(document)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
