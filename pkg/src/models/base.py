"""
Base enums shared across the FilmCrew data models.
"""

from enum import Enum


class MessageRole(str, Enum):
    """Roles of a chat-completion message."""
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class Posture(str, Enum):
    STANDING = "standing"
    SITTING = "sitting"


class StateEffect(str, Enum):
    """How an action changes the performer's posture."""
    NONE = "none"
    TO_SITTING = "to_sitting"
    TO_STANDING = "to_standing"


class ShotKind(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class RuleId(str, Enum):
    """Validator rules. Declaration order is the tie-break order of diagnostics."""
    UNKNOWN_ACTION = "UnknownAction"
    UNKNOWN_SHOT = "UnknownShot"
    STATE_MISMATCH = "StateMismatch"
    DOUBLE_ACTION = "DoubleAction"
    SIT_UNSITTABLE = "SitUnsittable"
    ILLEGAL_STATE_CHANGE = "IllegalStateChange"
    POSITION_COLLISION = "PositionCollision"
    CAPACITY_EXCEEDED = "CapacityExceeded"
    UNKNOWN_POSITION = "UnknownPosition"
    OPENING_SHOT_RULE = "OpeningShotRule"
    ZOOM_NEEDS_LONG = "ZoomNeedsLong"
    TRUCK_ONLY_OPENING = "TruckOnlyOpening"
    TRACKING_NEEDS_MOTION = "TrackingNeedsMotion"
    PAN_RUN_RULE = "PanRunRule"
    CURVE_SURROUND_FIRST_APPEARANCE = "CurveSurroundFirstAppearance"
    CONSECUTIVE_STATIC_REPEAT = "ConsecutiveStaticRepeat"
    POSITION_SNAPSHOT_MISMATCH = "PositionSnapshotMismatch"


class Role(str, Enum):
    """Crew roles."""
    DIRECTOR = "director"
    SCREENWRITER = "screenwriter"
    ACTOR = "actor"
    CINEMATOGRAPHER = "cinematographer"


class Peer(str, Enum):
    """Debate participants."""
    P = "P"
    Q = "Q"


class Stage(str, Enum):
    """Workflow stages in execution order."""
    IDEA = "idea"
    SCRIPT1 = "script1"
    SCRIPT2 = "script2"
    SCRIPT3 = "script3"
    CINEMA = "cinema"
    ASSEMBLED = "assembled"


class CollaborationMode(str, Enum):
    GROUP = "group"
    SOLO = "solo"
