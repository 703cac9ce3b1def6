"""
Chat-completion providers: a live OpenAI-compatible client and a replay provider.
"""

import logging
import os
import threading
import time
from abc import ABC, abstractmethod
from collections import defaultdict, deque
from typing import Any, Callable, Deque, Dict, Iterable, List, Optional, Sequence, Tuple

from langchain_core.messages import AIMessage, BaseMessage, HumanMessage, SystemMessage
from langchain_openai import ChatOpenAI
from openai import (
    APIConnectionError,
    APIStatusError,
    APITimeoutError,
    AuthenticationError,
    InternalServerError,
    PermissionDeniedError,
    RateLimitError,
)
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from ..errors import (
    AuthError,
    FilmCrewError,
    NoJsonFound,
    ProviderError,
    ReplayExhausted,
    SchemaRetriesExhausted,
    TransportError,
)
from ..models import ChatMessage, MessageRole, ProviderCallRecord, ProviderConfig
from .json_extract import extract_json
from .transcript import Transcript

logger = logging.getLogger(__name__)

TRANSIENT_ERRORS = (APIConnectionError, APITimeoutError, RateLimitError, InternalServerError)

SchemaCheck = Callable[[Any], List[str]]


class ChatProvider(ABC):
    """Provider boundary. Every call lands in the transcript, failed ones with their error."""

    deterministic = False

    def __init__(self, transcript: Optional[Transcript] = None):
        self.transcript = transcript if transcript is not None else Transcript()

    def complete(self, messages: Sequence[ChatMessage], config: ProviderConfig, agent_tag: str) -> str:
        if not messages:
            raise ValueError("messages must not be empty")
        call_index = self.transcript.reserve_index()
        started = time.monotonic()
        try:
            text, latency = self._complete(list(messages), config, agent_tag)
        except FilmCrewError as exc:
            self.transcript.append(ProviderCallRecord(
                call_index=call_index,
                agent_tag=agent_tag,
                request=list(messages),
                response="",
                latency=time.monotonic() - started,
                error=f"{exc.__class__.__name__}: {exc.message}",
            ))
            raise
        self.transcript.append(ProviderCallRecord(
            call_index=call_index,
            agent_tag=agent_tag,
            request=list(messages),
            response=text,
            latency=latency,
        ))
        return text

    @abstractmethod
    def _complete(
        self, messages: List[ChatMessage], config: ProviderConfig, agent_tag: str
    ) -> Tuple[str, float]:
        """Return (assistant text, latency in seconds)."""


def _to_langchain(message: ChatMessage) -> BaseMessage:
    if message.role is MessageRole.SYSTEM:
        return SystemMessage(content=message.content)
    if message.role is MessageRole.ASSISTANT:
        return AIMessage(content=message.content)
    return HumanMessage(content=message.content)


class LiveProvider(ChatProvider):
    """OpenAI-style chat completions through langchain-openai."""

    def __init__(self, config: ProviderConfig, transcript: Optional[Transcript] = None):
        super().__init__(transcript)
        self.api_key = os.getenv(config.api_key_env_var)
        if not self.api_key:
            raise AuthError(f"API key not set; export {config.api_key_env_var} or use --replay")
        self._clients: Dict[Tuple[Any, ...], ChatOpenAI] = {}
        self._clients_lock = threading.Lock()

    def _client(self, config: ProviderConfig) -> ChatOpenAI:
        key = (config.model_name, config.temperature, config.base_url, config.timeout)
        with self._clients_lock:
            if key not in self._clients:
                self._clients[key] = ChatOpenAI(
                    model=config.model_name,
                    temperature=config.temperature,
                    api_key=self.api_key,
                    base_url=config.base_url,
                    timeout=config.timeout,
                    max_retries=0,
                )
            return self._clients[key]

    def _complete(
        self, messages: List[ChatMessage], config: ProviderConfig, agent_tag: str
    ) -> Tuple[str, float]:
        llm = self._client(config)
        prompt = [_to_langchain(m) for m in messages]
        retrying = Retrying(
            stop=stop_after_attempt(config.max_retries + 1),
            wait=wait_exponential(multiplier=config.backoff_seconds, max=30),
            retry=retry_if_exception_type(TRANSIENT_ERRORS),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            reraise=True,
        )

        started = time.monotonic()
        try:
            for attempt in retrying:
                with attempt:
                    result = llm.invoke(prompt)
        except TRANSIENT_ERRORS as exc:
            raise TransportError(
                f"chat completion failed after {config.max_retries + 1} attempt(s): {exc}", agent=agent_tag
            )
        except (AuthenticationError, PermissionDeniedError) as exc:
            raise AuthError(f"API key rejected: {exc}", agent=agent_tag)
        except APIStatusError as exc:
            excerpt = str(exc.body or exc.message)[:200]
            raise ProviderError(f"chat completion returned status {exc.status_code}: {excerpt}", agent=agent_tag)
        latency = time.monotonic() - started

        content = result.content
        if not isinstance(content, str):
            content = "".join(part if isinstance(part, str) else str(part.get("text", "")) for part in content)
        logger.debug(f"{agent_tag} answered in {latency:.2f}s")
        return content, latency


class ReplayProvider(ChatProvider):
    """Serves recorded responses per agent tag, in recorded order. Holds no transport."""

    deterministic = True

    def __init__(
        self,
        records: Iterable[ProviderCallRecord],
        transcript: Optional[Transcript] = None,
        skip: Optional[Dict[str, int]] = None,
    ):
        super().__init__(transcript)
        self._queues: Dict[str, Deque[ProviderCallRecord]] = defaultdict(deque)
        for record in sorted(records, key=lambda r: r.call_index):
            if not record.failed:
                self._queues[record.agent_tag].append(record)
        for tag, count in (skip or {}).items():
            for _ in range(min(count, len(self._queues[tag]))):
                self._queues[tag].popleft()
        self._lock = threading.Lock()

    def remaining(self, agent_tag: Optional[str] = None) -> int:
        with self._lock:
            if agent_tag is not None:
                return len(self._queues.get(agent_tag, ()))
            return sum(len(queue) for queue in self._queues.values())

    def _complete(
        self, messages: List[ChatMessage], config: ProviderConfig, agent_tag: str
    ) -> Tuple[str, float]:
        with self._lock:
            queue = self._queues.get(agent_tag)
            if not queue:
                raise ReplayExhausted(agent_tag)
            record = queue.popleft()
        return record.response, record.latency


def _feedback(problems: List[str]) -> str:
    listed = "\n".join(f"- {problem}" for problem in problems)
    return (
        "Your previous reply could not be used:\n"
        f"{listed}\n"
        "Reply again with only the requested JSON content."
    )


def complete_json(
    provider: ChatProvider,
    messages: Sequence[ChatMessage],
    config: ProviderConfig,
    schema_check: Optional[SchemaCheck] = None,
    attempts: int = 3,
    agent_tag: str = "agent",
) -> Any:
    """Call the provider until a reply parses and passes ``schema_check``.

    ``schema_check`` returns a list of problems; an empty list accepts the document.
    Each failed attempt is echoed back to the model before the next one.
    """
    if attempts < 1:
        raise ValueError("attempts must be at least 1")

    conversation = list(messages)
    raw = ""
    problems: List[str] = []
    for attempt in range(1, attempts + 1):
        raw = provider.complete(conversation, config, agent_tag)
        try:
            document = extract_json(raw)
            problems = list(schema_check(document)) if schema_check is not None else []
        except NoJsonFound as exc:
            problems = [exc.message]
        except (FilmCrewError, ValueError, KeyError, TypeError, IndexError) as exc:
            problems = [str(exc)]

        if not problems:
            return document

        logger.warning(f"{agent_tag} reply rejected (attempt {attempt}/{attempts}): {'; '.join(problems)}")
        conversation.append(ChatMessage(role=MessageRole.ASSISTANT, content=raw or "(empty)"))
        conversation.append(ChatMessage(role=MessageRole.USER, content=_feedback(problems)))

    raise SchemaRetriesExhausted(attempts, raw, problems, agent=agent_tag)
