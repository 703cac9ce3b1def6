"""
Chat-completion data models.
"""

import json
from typing import Any, List, Optional

from pydantic import BaseModel, Field, field_validator

from .base import MessageRole


class ChatMessage(BaseModel):
    """Individual chat message."""
    role: MessageRole
    content: str

    @field_validator("content")
    @classmethod
    def not_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("message content must not be empty")
        return value


class ProviderCallRecord(BaseModel):
    """One request/response pair, as persisted in transcript.jsonl."""
    call_index: int = Field(ge=0)
    agent_tag: str
    request: List[ChatMessage] = Field(default_factory=list)
    response: str
    latency: float = 0.0
    # Set when the call failed for good; the response is then empty.
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @field_validator("response", mode="before")
    @classmethod
    def response_as_text(cls, value: Any) -> Any:
        # Hand-authored fixtures may store the reply as a JSON value.
        if isinstance(value, str):
            return value
        return json.dumps(value, ensure_ascii=False)


class ProviderConfig(BaseModel):
    base_url: Optional[str] = None
    model_name: str = "gpt-4o-2024-05-13"
    temperature: float = 0.2
    max_retries: int = Field(default=3, ge=0)
    timeout: float = Field(default=60.0, gt=0)
    backoff_seconds: float = Field(default=1.0, ge=0)
    api_key_env_var: str = "FILMAGENT_API_KEY"
