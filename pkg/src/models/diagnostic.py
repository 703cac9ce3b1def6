"""
Validator findings.
"""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from .base import Posture, RuleId, Severity

_RULE_ORDER = {rule: index for index, rule in enumerate(RuleId)}


class FixTarget(BaseModel):
    """One concrete field edit proposed by a diagnostic.

    ``field`` is a dotted path inside the event, e.g. ``shot`` or ``actions.0.action``.
    """
    scene_index: int
    event_index: int
    field: str
    value: str


class Diagnostic(BaseModel):
    rule: RuleId
    severity: Severity
    scene_index: int
    event_index: Optional[int] = None
    message: str
    suggestion: Optional[str] = None
    fixes: List[FixTarget] = Field(default_factory=list)

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        event = -1 if self.event_index is None else self.event_index
        return (self.scene_index, event, _RULE_ORDER[self.rule])

    @property
    def locus(self) -> str:
        if self.event_index is None:
            return f"scene {self.scene_index}"
        return f"scene {self.scene_index} event {self.event_index}"

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_record(self) -> Dict[str, Any]:
        """Schema-stable record emitted by the CLI."""
        return {
            "rule": self.rule.value,
            "severity": self.severity.value,
            "scene": self.scene_index,
            "event": self.event_index,
            "message": self.message,
            "suggestion": self.suggestion,
        }


class CharacterState(BaseModel):
    """Where a character is and how they hold themselves after an event."""
    position: Optional[str] = None
    posture: Posture
