"""
Stage world models: locations, positions, actions and shot types.
"""

from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator

from .base import Posture, RuleId, ShotKind, StateEffect


def normalize_name(name: str) -> str:
    """Case- and whitespace-insensitive lookup key."""
    return " ".join(name.split()).casefold()


class PositionSpec(BaseModel):
    """A designated spot where a character can stand or sit."""
    model_config = ConfigDict(frozen=True)

    id: str
    description: str
    sittable: bool = False
    location_id: str = ""

    @field_validator("id", "description")
    @classmethod
    def not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("must not be empty")
        return value


class LocationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    capacity: int
    positions: Tuple[PositionSpec, ...]

    def position(self, position_id: str) -> Optional[PositionSpec]:
        key = normalize_name(position_id)
        for position in self.positions:
            if normalize_name(position.id) == key:
                return position
        return None

    @property
    def sittable_count(self) -> int:
        return sum(1 for p in self.positions if p.sittable)


class ActionSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    canonical_name: str
    required_state: Posture
    state_effect: StateEffect = StateEffect.NONE
    aliases: Tuple[str, ...] = ()
    description: str = ""
    # Names that are not aliases but should suggest this action when seen.
    suggested_for: Tuple[str, ...] = ()


class ShotSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    canonical_name: str
    kind: ShotKind
    aliases: Tuple[str, ...] = ()
    usage_rules: Tuple[RuleId, ...] = ()
    description: str = ""
    usage: str = ""

    def has_rule(self, rule: RuleId) -> bool:
        return rule in self.usage_rules


class EnvironmentSpec(BaseModel):
    """The whole stage world. Immutable after load."""
    model_config = ConfigDict(frozen=True)

    notes: str = ""
    locations: Tuple[LocationSpec, ...]
    actions: Tuple[ActionSpec, ...]
    shots: Tuple[ShotSpec, ...]

    _locations_by_name: Dict[str, LocationSpec] = PrivateAttr(default_factory=dict)
    _actions_by_name: Dict[str, ActionSpec] = PrivateAttr(default_factory=dict)
    _shots_by_name: Dict[str, ShotSpec] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        self._locations_by_name = {normalize_name(loc.name): loc for loc in self.locations}
        # Canonical names win over aliases when both normalize to the same key.
        for table, specs in ((self._actions_by_name, self.actions), (self._shots_by_name, self.shots)):
            for spec in specs:
                for alias in spec.aliases:
                    table.setdefault(normalize_name(alias), spec)
            for spec in specs:
                table[normalize_name(spec.canonical_name)] = spec

    def location(self, name: str) -> Optional[LocationSpec]:
        return self._locations_by_name.get(normalize_name(name))

    def lookup_action(self, name: str) -> Optional[ActionSpec]:
        return self._actions_by_name.get(normalize_name(name))

    def lookup_shot(self, name: str) -> Optional[ShotSpec]:
        return self._shots_by_name.get(normalize_name(name))

    def action_names(self) -> Dict[str, str]:
        """Every accepted spelling (normalized) mapped to its canonical name."""
        return {key: spec.canonical_name for key, spec in self._actions_by_name.items()}

    def shot_names(self) -> Dict[str, str]:
        return {key: spec.canonical_name for key, spec in self._shots_by_name.items()}


class EnvironmentStats(BaseModel):
    locations: int
    positions: int
    standing_positions: int
    sittable_positions: int
    actions: int
    shots: int
    static_shots: int
    dynamic_shots: int
    capacities: Dict[str, int] = Field(default_factory=dict)

    def summary(self) -> str:
        return (
            f"{self.locations} locations, {self.positions} positions "
            f"({self.standing_positions} standing / {self.sittable_positions} sitting), "
            f"{self.actions} actions, {self.shots} shots"
        )
