"""
Screenplay data models: character profiles, scene outlines and the annotated script.

Field aliases reproduce the on-disk script format exactly ("scene information",
"initial position", "scene", "current position"). Unknown keys are kept as extras
and re-emitted on serialization.
"""

from typing import Annotated, Any, List, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Discriminator,
    Field,
    Tag,
    field_validator,
    model_validator,
)

from .base import Gender, Posture

MAX_SCENES = 3
MAX_PROFILES = 4


def _split_names(value: Any) -> Any:
    if isinstance(value, str):
        return [name.strip() for name in value.replace(" and ", ",").split(",") if name.strip()]
    return value


class CharacterProfile(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    name: str
    age: str
    gender: Gender
    occupation: str
    personality_traits: str = Field(alias="personality traits")
    speaking_style: str = Field(alias="speaking style")

    @field_validator("age", mode="before")
    @classmethod
    def age_as_text(cls, value: Any) -> Any:
        return str(value) if isinstance(value, (int, float)) else value

    @field_validator("gender", mode="before")
    @classmethod
    def lower_gender(cls, value: Any) -> Any:
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("name")
    @classmethod
    def single_word(cls, value: str) -> str:
        if not value or any(ch.isspace() for ch in value):
            raise ValueError("name must be a single word")
        return value

    @field_validator("age", "occupation", "personality_traits", "speaking_style")
    @classmethod
    def not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("must not be empty")
        return value


class SceneOutline(BaseModel):
    """One planned scene. Location and capacity checks need the environment and live in the workflow."""
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    sub_topic: str = Field(alias="sub-topic")
    selected_characters: List[str] = Field(alias="selected-characters")
    selected_location: str = Field(alias="selected-location")
    story_plot: str = Field(alias="story-plot")
    dialogue_goal: str = Field(alias="dialogue-goal")

    @field_validator("selected_characters", mode="before")
    @classmethod
    def split_characters(cls, value: Any) -> Any:
        return _split_names(value)


class CharacterPosition(BaseModel):
    model_config = ConfigDict(extra="allow")

    character: str
    position: str


class ActionEntry(BaseModel):
    """One action in a line. Unknown keys are kept; ``reason`` and ``reasoning`` are not."""
    model_config = ConfigDict(extra="allow")

    character: str
    state: Optional[Posture] = None
    action: str

    @model_validator(mode="before")
    @classmethod
    def drop_reasoning(cls, value: Any) -> Any:
        # Models justify each action; the script keeps only the action itself.
        if isinstance(value, dict):
            return {key: item for key, item in value.items() if key not in ("reason", "reasoning")}
        return value

    @field_validator("state", mode="before")
    @classmethod
    def lower_state(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = value.strip().lower()
            return value or None
        return value


class Move(BaseModel):
    model_config = ConfigDict(extra="allow")

    character: str
    destination: str


class MoveEvent(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    move: Move
    shot: Optional[str] = None
    current_position: Optional[List[CharacterPosition]] = Field(default=None, alias="current position")

    @property
    def subject(self) -> str:
        return self.move.character


class LineEvent(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    speaker: str
    content: str
    actions: List[ActionEntry] = Field(default_factory=list)
    shot: Optional[str] = None
    current_position: Optional[List[CharacterPosition]] = Field(default=None, alias="current position")

    @property
    def subject(self) -> str:
        return self.speaker


def _event_kind(value: Any) -> str:
    if isinstance(value, dict):
        return "move" if "move" in value else "line"
    return "move" if isinstance(value, MoveEvent) else "line"


SceneEvent = Annotated[
    Union[Annotated[MoveEvent, Tag("move")], Annotated[LineEvent, Tag("line")]],
    Discriminator(_event_kind),
]


class SceneInformation(BaseModel):
    model_config = ConfigDict(extra="allow")

    who: List[str]
    where: str
    what: str = ""

    @field_validator("who", mode="before")
    @classmethod
    def split_who(cls, value: Any) -> Any:
        return _split_names(value)


class Scene(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    scene_information: SceneInformation = Field(alias="scene information")
    initial_position: List[CharacterPosition] = Field(default_factory=list, alias="initial position")
    events: List[SceneEvent] = Field(default_factory=list, alias="scene")

    @model_validator(mode="after")
    def check_cast(self) -> "Scene":
        who = set(self.scene_information.who)
        seen = set()
        for entry in self.initial_position:
            if entry.character not in who:
                raise ValueError(f"positioned character '{entry.character}' is not in 'who'")
            key = entry.position.casefold()
            if key in seen:
                raise ValueError(f"initial position '{entry.position}' is assigned twice")
            seen.add(key)
        for index, event in enumerate(self.events):
            names = [event.move.character] if isinstance(event, MoveEvent) else (
                [event.speaker] + [a.character for a in event.actions])
            for name in names:
                if name not in who:
                    raise ValueError(f"event {index} names '{name}', who is not in the scene")
        return self

    @property
    def who(self) -> List[str]:
        return self.scene_information.who

    @property
    def location(self) -> str:
        return self.scene_information.where

    def lines(self) -> List[LineEvent]:
        return [e for e in self.events if isinstance(e, LineEvent)]


class AnnotatedScript(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="allow")

    topic: str = ""
    profiles: List[CharacterProfile] = Field(default_factory=list)
    scenes: List[Scene]

    @field_validator("scenes")
    @classmethod
    def scene_count(cls, scenes: List[Scene]) -> List[Scene]:
        if not scenes:
            raise ValueError("a script needs at least one scene")
        if len(scenes) > MAX_SCENES:
            raise ValueError(f"a script has at most {MAX_SCENES} scenes")
        return scenes

    @field_validator("profiles")
    @classmethod
    def profile_count(cls, profiles: List[CharacterProfile]) -> List[CharacterProfile]:
        if len(profiles) > MAX_PROFILES:
            raise ValueError(f"a script has at most {MAX_PROFILES} profiles")
        names = [p.name for p in profiles]
        if len(set(names)) != len(names):
            raise ValueError("profile names must be unique")
        return profiles

    @model_validator(mode="after")
    def check_profiles(self) -> "AnnotatedScript":
        # Excerpts without profiles skip the coverage check.
        if not self.profiles:
            return self
        known = {p.name for p in self.profiles}
        cast = {name for scene in self.scenes for name in scene.who}
        missing = sorted(cast - known)
        if missing:
            raise ValueError(f"characters without a profile: {', '.join(missing)}")
        unused = sorted(known - cast)
        if unused:
            raise ValueError(f"profiles that appear in no scene: {', '.join(unused)}")
        return self

    def profile(self, name: str) -> Optional[CharacterProfile]:
        return next((p for p in self.profiles if p.name == name), None)


class LineTiming(BaseModel):
    scene_index: int
    event_index: int
    duration: float = Field(gt=0)


class LineRevision(BaseModel):
    """A before/after pair for one changed dialogue line."""
    scene_index: int
    line_index: int
    speaker: str
    before: dict
    after: dict
