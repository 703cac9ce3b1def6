"""
Run-level models: run state, camera annotation sets, CLI configuration and the final bundle.
"""

import re
import uuid
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from .base import CollaborationMode, Stage
from .chat import ProviderConfig
from .diagnostic import Diagnostic
from .script import AnnotatedScript, LineTiming

STAGE_ORDER: List[Stage] = list(Stage)

_NUMBER = re.compile(r"(\d+)")


def _ordinal(key: str, fallback: int) -> int:
    match = _NUMBER.search(key)
    return int(match.group(1)) if match else fallback


def ordered_items(mapping: Dict[str, Any]) -> List[Tuple[str, Any]]:
    """Items of a "scene N" or "selected-shot-K" map in numeric key order."""
    ranked = sorted(enumerate(mapping.items()), key=lambda pair: _ordinal(pair[1][0], pair[0] + 1))
    return [item for _, item in ranked]


class RunState(BaseModel):
    """Persistent progress of one production run. ``stage`` is the last completed stage."""
    run_id: str = Field(default_factory=lambda: uuid.uuid4().hex[:12])
    topic: str
    stage: Optional[Stage] = None
    artifacts: Dict[str, List[str]] = Field(default_factory=dict)
    config_snapshot: Dict[str, Any] = Field(default_factory=dict)
    call_count: int = 0
    stage_calls: Dict[str, int] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    created_at: datetime = Field(default_factory=datetime.now)
    updated_at: datetime = Field(default_factory=datetime.now)

    def is_complete(self, stage: Stage) -> bool:
        if self.stage is None:
            return False
        return STAGE_ORDER.index(self.stage) >= STAGE_ORDER.index(stage)

    def next_stage(self) -> Optional[Stage]:
        if self.stage is None:
            return STAGE_ORDER[0]
        index = STAGE_ORDER.index(self.stage) + 1
        return STAGE_ORDER[index] if index < len(STAGE_ORDER) else None

    def advance(self, stage: Stage, artifacts: List[str], call_count: int) -> None:
        expected = self.next_stage()
        if stage != expected:
            current = self.stage.value if self.stage else "start"
            raise ValueError(f"stage '{stage.value}' cannot follow '{current}'")
        self.stage = stage
        self.artifacts[stage.value] = list(artifacts)
        self.stage_calls[stage.value] = call_count - self.call_count
        self.call_count = call_count
        self.updated_at = datetime.now()


class ShotChoice(BaseModel):
    shot: str
    reasoning: str = ""


class CameraAnnotationSet(BaseModel):
    """One cinematographer's per-scene, per-event shot choices."""
    author: str
    scenes: List[List[ShotChoice]] = Field(default_factory=list)

    @classmethod
    def from_document(cls, document: Dict[str, Any], author: str) -> "CameraAnnotationSet":
        scenes: List[List[ShotChoice]] = []
        for _, shots in ordered_items(document):
            choices = []
            for _, value in ordered_items(shots):
                if isinstance(value, dict):
                    choices.append(ShotChoice(shot=str(value.get("shot", "")),
                                              reasoning=str(value.get("reasoning", ""))))
                else:
                    choices.append(ShotChoice(shot=str(value)))
            scenes.append(choices)
        return cls(author=author, scenes=scenes)

    def to_document(self) -> Dict[str, Dict[str, Dict[str, str]]]:
        return {
            f"scene {s + 1}": {
                f"selected-shot-{k + 1}": {"reasoning": choice.reasoning, "shot": choice.shot}
                for k, choice in enumerate(choices)
            }
            for s, choices in enumerate(self.scenes)
        }

    def shot_names(self) -> List[List[str]]:
        return [[choice.shot for choice in choices] for choices in self.scenes]


class CliConfig(BaseModel):
    environment_path: str
    template_directory: str
    provider: ProviderConfig
    runs_directory: str
    ccv_max: int = Field(default=3, ge=1)
    debate_rounds: int = Field(default=2, ge=0)
    strict_counts: bool = False
    compat_loop_guard: bool = False
    mode: CollaborationMode = CollaborationMode.GROUP


class FinalBundle(BaseModel):
    script: AnnotatedScript
    timings: List[LineTiming]
    storyboard: str
    manifest: Dict[str, Any]
    diagnostics: List[Diagnostic] = Field(default_factory=list)
    run_dir: str = ""
