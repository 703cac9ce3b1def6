"""
Data models for the FilmCrew screenplay engine.
"""

from .base import (
    MessageRole,
    Posture,
    StateEffect,
    ShotKind,
    Gender,
    Severity,
    RuleId,
    Role,
    Peer,
    Stage,
    CollaborationMode,
)

from .environment import (
    normalize_name,
    PositionSpec,
    LocationSpec,
    ActionSpec,
    ShotSpec,
    EnvironmentSpec,
    EnvironmentStats,
)

from .script import (
    CharacterProfile,
    SceneOutline,
    CharacterPosition,
    ActionEntry,
    Move,
    MoveEvent,
    LineEvent,
    SceneEvent,
    SceneInformation,
    Scene,
    AnnotatedScript,
    LineTiming,
    LineRevision,
)

from .diagnostic import Diagnostic, FixTarget, CharacterState

from .chat import ChatMessage, ProviderCallRecord, ProviderConfig

from .collaboration import (
    DialogueHistory,
    HistoryEntry,
    Critique,
    Verdict,
    Judgment,
    CollaborationStep,
    CCVResult,
    DebateResult,
)

from .crew import PromptTemplate, RoleAgent

from .run import RunState, ShotChoice, CameraAnnotationSet, CliConfig, FinalBundle, STAGE_ORDER, ordered_items

__all__ = [
    # Enums
    "MessageRole",
    "Posture",
    "StateEffect",
    "ShotKind",
    "Gender",
    "Severity",
    "RuleId",
    "Role",
    "Peer",
    "Stage",
    "CollaborationMode",

    # Environment models
    "normalize_name",
    "PositionSpec",
    "LocationSpec",
    "ActionSpec",
    "ShotSpec",
    "EnvironmentSpec",
    "EnvironmentStats",

    # Script models
    "CharacterProfile",
    "SceneOutline",
    "CharacterPosition",
    "ActionEntry",
    "Move",
    "MoveEvent",
    "LineEvent",
    "SceneEvent",
    "SceneInformation",
    "Scene",
    "AnnotatedScript",
    "LineTiming",
    "LineRevision",

    # Validator models
    "Diagnostic",
    "FixTarget",
    "CharacterState",

    # Chat models
    "ChatMessage",
    "ProviderCallRecord",
    "ProviderConfig",

    # Collaboration models
    "DialogueHistory",
    "HistoryEntry",
    "Critique",
    "Verdict",
    "Judgment",
    "CollaborationStep",
    "CCVResult",
    "DebateResult",

    # Crew and run models
    "PromptTemplate",
    "RoleAgent",
    "RunState",
    "ShotChoice",
    "CameraAnnotationSet",
    "CliConfig",
    "FinalBundle",
    "STAGE_ORDER",
    "ordered_items",
]
