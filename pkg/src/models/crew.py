"""
Crew models: prompt templates and role agents.
"""

from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .base import Role
from .chat import ProviderConfig
from .script import CharacterProfile


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    body: str
    required_vars: Tuple[str, ...]
    role: Role
    stage: str = ""
    purpose: str = ""
    output_schema: Dict[str, Any] = Field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.id.split(":", 1)[-1]


class RoleAgent(BaseModel):
    role: Role
    tag: str
    character: Optional[CharacterProfile] = None
    provider_config: ProviderConfig = Field(default_factory=ProviderConfig)

    @model_validator(mode="after")
    def actors_are_bound(self) -> "RoleAgent":
        if self.role is Role.ACTOR and self.character is None:
            raise ValueError("an actor needs a bound character")
        if self.role is not Role.ACTOR and self.character is not None:
            raise ValueError(f"a {self.role.value} cannot be bound to a character")
        return self
