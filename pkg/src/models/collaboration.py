"""
Collaboration records: dialogue history, critiques, verdicts and judgments.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from .base import Peer

CONTEXT = "context"
INSTRUCTION = "instruction"


class HistoryEntry(BaseModel):
    source: str
    content: str


class DialogueHistory(BaseModel):
    """Shared conversation context. Starts as [context; instruction] and only grows."""
    entries: List[HistoryEntry] = Field(default_factory=list)

    @classmethod
    def start(cls, context: str, instruction: str) -> "DialogueHistory":
        return cls(entries=[
            HistoryEntry(source=CONTEXT, content=context),
            HistoryEntry(source=INSTRUCTION, content=instruction),
        ])

    @property
    def context(self) -> str:
        return self.entries[0].content

    @property
    def instruction(self) -> str:
        return self.entries[1].content

    def append(self, source: str, content: str) -> None:
        self.entries.append(HistoryEntry(source=source, content=content))

    def latest(self, source: str) -> Optional[str]:
        for entry in reversed(self.entries):
            if entry.source == source:
                return entry.content
        return None

    def __len__(self) -> int:
        return len(self.entries)


class Critique(BaseModel):
    author: str
    content: str
    round: int = Field(ge=1)


class Verdict(BaseModel):
    finalize: bool
    rationale: str = ""


class Judgment(BaseModel):
    winner: Peer
    rationale: str = ""


class CollaborationStep(BaseModel):
    """One audited agent output."""
    agent_tag: str
    phase: str
    round: int
    text: str


class CCVResult(BaseModel):
    response: str
    rounds: int
    verified: bool
    critiques: List[Critique] = Field(default_factory=list)
    steps: List[CollaborationStep] = Field(default_factory=list)


class DebateResult(BaseModel):
    judgment: Judgment
    position_p: str
    position_q: str
    steps: List[CollaborationStep] = Field(default_factory=list)
    judged_positions: str = "post-debate"

    @property
    def winning_position(self) -> str:
        return self.position_p if self.judgment.winner is Peer.P else self.position_q
