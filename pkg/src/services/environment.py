"""
Environment service: loads the stage world and resolves action and shot names.
"""

import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from pydantic import ValidationError

from ..errors import IntegrityError, ParseError, UnknownAction, UnknownShot
from ..models import (
    ActionSpec,
    EnvironmentSpec,
    EnvironmentStats,
    LocationSpec,
    Posture,
    RuleId,
    ShotKind,
    ShotSpec,
    StateEffect,
    normalize_name,
)

logger = logging.getLogger(__name__)

# Counts of the shipped full world, enforced only with strict_counts.
FULL_COUNTS = {
    "locations": 15,
    "positions": 65,
    "standing_positions": 32,
    "sittable_positions": 33,
    "actions": 21,
    "shots": 9,
    "static_shots": 3,
    "dynamic_shots": 6,
}

SUGGESTION_THRESHOLD = 0.5
NEAREST_COUNT = 3


def load_environment(path: Union[str, Path], strict_counts: bool = False) -> EnvironmentSpec:
    """Load and check an environment file.

    Raises ParseError for unreadable or malformed files and IntegrityError naming the
    first violated invariant.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError("environment file not found", locus=str(path))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, locus=f"{path}:{exc.lineno}:{exc.colno}")

    if not isinstance(raw, dict):
        raise ParseError("environment file must hold a JSON object", locus=str(path))

    for location in raw.get("locations") or []:
        if isinstance(location, dict):
            for position in location.get("positions") or []:
                if isinstance(position, dict):
                    position.setdefault("location_id", location.get("name", ""))

    try:
        env = EnvironmentSpec.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        locus = ".".join(str(part) for part in first["loc"])
        raise ParseError(first["msg"], locus=f"{path}:{locus}" if locus else str(path))

    check_integrity(env, strict_counts=strict_counts)
    logger.info(f"Loaded environment from {path}: {environment_stats(env).summary()}")
    return env


def _first_duplicate(names: Iterable[str]) -> Optional[str]:
    seen = set()
    for name in names:
        key = normalize_name(name)
        if key in seen:
            return name
        seen.add(key)
    return None


def check_integrity(env: EnvironmentSpec, strict_counts: bool = False) -> None:
    duplicate = _first_duplicate(loc.name for loc in env.locations)
    if duplicate:
        raise IntegrityError("location names unique", f"duplicate location name '{duplicate}'")

    for location in env.locations:
        if location.capacity < 2:
            raise IntegrityError(
                "capacity >= 2", f"location '{location.name}' has capacity {location.capacity}"
            )
        if not location.positions:
            raise IntegrityError("positions non-empty", f"location '{location.name}' has no positions")
        duplicate = _first_duplicate(p.id for p in location.positions)
        if duplicate:
            raise IntegrityError(
                "position ids unique", f"location '{location.name}' repeats position '{duplicate}'"
            )

    _check_catalog("action", [(a.canonical_name, a.aliases) for a in env.actions])
    _check_state_effects(env.actions)
    _check_catalog("shot", [(s.canonical_name, s.aliases) for s in env.shots])

    if strict_counts:
        stats = environment_stats(env)
        for field, expected in FULL_COUNTS.items():
            actual = getattr(stats, field)
            if actual != expected:
                raise IntegrityError(
                    f"{field} == {expected}", f"environment has {actual} {field.replace('_', ' ')}"
                )


def _check_catalog(kind: str, entries: Sequence[tuple]) -> None:
    duplicate = _first_duplicate(name for name, _ in entries)
    if duplicate:
        raise IntegrityError(f"{kind} names unique", f"duplicate {kind} name '{duplicate}'")
    owners = {normalize_name(name): name for name, _ in entries}
    for name, aliases in entries:
        for alias in aliases:
            key = normalize_name(alias)
            owner = owners.get(key)
            if owner is not None and owner != name:
                raise IntegrityError(
                    f"{kind} aliases disjoint",
                    f"{kind} alias '{alias}' of '{name}' already names '{owner}'",
                )
            owners[key] = name


def _check_state_effects(actions: Sequence[ActionSpec]) -> None:
    changing = [a for a in actions if a.state_effect is not StateEffect.NONE]
    if len(changing) != 2:
        raise IntegrityError(
            "exactly two state-changing actions",
            f"found {len(changing)} actions with a state effect",
        )
    expected = {
        "sit down": (Posture.STANDING, StateEffect.TO_SITTING),
        "stand up": (Posture.SITTING, StateEffect.TO_STANDING),
    }
    for action in changing:
        rule = expected.get(normalize_name(action.canonical_name))
        if rule != (action.required_state, action.state_effect):
            raise IntegrityError(
                "Sit Down and Stand Up are the only posture changes",
                f"action '{action.canonical_name}' has required state "
                f"{action.required_state.value} and effect {action.state_effect.value}",
            )


# Name resolution

def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance: insertions, deletions and substitutions each cost 1."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, left in enumerate(a, start=1):
        current = [i]
        for j, right in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (left != right)))
        previous = current
    return previous[-1]


def name_distance(a: str, b: str) -> float:
    """Edit distance between normalized names, scaled by the longer one to 0..1."""
    a, b = normalize_name(a), normalize_name(b)
    longest = max(len(a), len(b))
    return edit_distance(a, b) / longest if longest else 0.0


def nearest_names(name: str, candidates: Sequence[str], n: int = NEAREST_COUNT) -> List[str]:
    """Closest catalog names by edit distance, best first; ties keep catalog order."""
    ranked = sorted(enumerate(candidates), key=lambda item: (name_distance(name, item[1]), item[0]))
    return [candidate for _, candidate in ranked[:n]]


def resolve_action(name: str, env: EnvironmentSpec) -> ActionSpec:
    spec = env.lookup_action(name)
    if spec is None:
        raise UnknownAction(name, nearest_names(name, [a.canonical_name for a in env.actions]))
    return spec


def resolve_shot(name: str, env: EnvironmentSpec) -> ShotSpec:
    spec = env.lookup_shot(name)
    if spec is None:
        raise UnknownShot(name, nearest_names(name, [s.canonical_name for s in env.shots]))
    return spec


def suggest_action(name: str, env: EnvironmentSpec) -> Optional[str]:
    """Replacement for an unknown action name, or None when nothing is close enough."""
    key = normalize_name(name)
    for action in env.actions:
        if key in {normalize_name(s) for s in action.suggested_for}:
            return action.canonical_name
    return _closest(name, [a.canonical_name for a in env.actions])


def suggest_shot(name: str, env: EnvironmentSpec) -> Optional[str]:
    return _closest(name, [s.canonical_name for s in env.shots])


def _closest(name: str, candidates: Sequence[str]) -> Optional[str]:
    nearest = nearest_names(name, candidates, n=1)
    if nearest and name_distance(name, nearest[0]) <= SUGGESTION_THRESHOLD:
        return nearest[0]
    return None


def counterpart_action(action: ActionSpec, posture: Posture, env: EnvironmentSpec) -> Optional[str]:
    """The same gesture for the other posture, e.g. Sitting Talking for Standing Talking."""
    words = action.canonical_name.split(" ", 1)
    if len(words) == 2 and words[0] in ("Standing", "Sitting"):
        prefix = "Standing" if posture is Posture.STANDING else "Sitting"
        twin = env.lookup_action(f"{prefix} {words[1]}")
        if twin is not None and twin.required_state is posture:
            return twin.canonical_name
    return None


def opening_shots(env: EnvironmentSpec) -> List[str]:
    return [s.canonical_name for s in env.shots if s.has_rule(RuleId.OPENING_SHOT_RULE)]


# Catalog rendering for prompts

def describe_positions(location: LocationSpec) -> str:
    lines = [f"{location.name} (maximum capacity: {location.capacity}):"]
    for position in location.positions:
        seat = "sittable" if position.sittable else "unsittable"
        lines.append(f"   - {position.id}: {position.description} ({seat})")
    return "\n".join(lines)


def describe_locations(env: EnvironmentSpec) -> str:
    return "\n".join(
        f"{index}. {location.name}: maximum capacity: {location.capacity}"
        for index, location in enumerate(env.locations, start=1)
    )


def describe_actions(env: EnvironmentSpec) -> str:
    sections = []
    for number, posture in enumerate((Posture.STANDING, Posture.SITTING), start=1):
        sections.append(f"{number}. Actions performed in {posture.value} state:")
        for action in env.actions:
            if action.required_state is posture:
                sections.append(f"   - {action.canonical_name}: {action.description}")
    return "\n".join(sections)


def describe_shots(env: EnvironmentSpec) -> str:
    sections = []
    for title, kind in (("Dynamic Shots", ShotKind.DYNAMIC), ("Static Shots", ShotKind.STATIC)):
        sections.append(f"{title}:")
        for shot in env.shots:
            if shot.kind is kind:
                sections.append(f"   - {shot.canonical_name}: {shot.description}")
                sections.append(f"     Usage Condition: {shot.usage}")
    return "\n".join(sections)


def environment_stats(env: EnvironmentSpec) -> EnvironmentStats:
    positions = [p for location in env.locations for p in location.positions]
    sittable = sum(1 for p in positions if p.sittable)
    static = sum(1 for s in env.shots if s.kind is ShotKind.STATIC)
    return EnvironmentStats(
        locations=len(env.locations),
        positions=len(positions),
        standing_positions=len(positions) - sittable,
        sittable_positions=sittable,
        actions=len(env.actions),
        shots=len(env.shots),
        static_shots=static,
        dynamic_shots=len(env.shots) - static,
        capacities={location.name: location.capacity for location in env.locations},
    )
