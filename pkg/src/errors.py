"""
Error hierarchy shared by every FilmCrew module.

Each error carries a message plus a context map (role, template id, stage, round...)
that callers may extend while the error propagates. ``exit_code`` is what the CLI
returns when the error reaches it.
"""

from typing import Any, Dict, List, Optional, Sequence


class FilmCrewError(Exception):
    """Base class for all FilmCrew errors."""

    exit_code = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)

    def tag(self, **context: Any) -> "FilmCrewError":
        """Attach more context without changing the error type."""
        for key, value in context.items():
            self.context.setdefault(key, value)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} [{details}]"


# Input errors

class ParseError(FilmCrewError):
    """Malformed input text. ``locus`` points at the failing place."""

    exit_code = 2

    def __init__(self, message: str, locus: str = "", **context: Any):
        super().__init__(message, **context)
        self.locus = locus

    def __str__(self) -> str:
        base = super().__str__()
        return f"{self.locus}: {base}" if self.locus else base


class SchemaError(FilmCrewError):
    """A document parsed but a required field is missing or invalid."""

    exit_code = 2

    def __init__(self, field: str, message: str = "", **context: Any):
        super().__init__(message or f"invalid or missing field '{field}'", **context)
        self.field = field


class IntegrityError(FilmCrewError):
    """A loaded artifact violates one of its invariants."""

    exit_code = 2

    def __init__(self, invariant: str, message: str = "", **context: Any):
        super().__init__(message or invariant, **context)
        self.invariant = invariant


# Environment resolution

class UnknownName(FilmCrewError):
    kind = "name"

    def __init__(self, name: str, candidates: Sequence[str] = (), **context: Any):
        hint = f"; nearest: {', '.join(candidates)}" if candidates else ""
        super().__init__(f"unknown {self.kind} '{name}'{hint}", **context)
        self.name = name
        self.candidates = list(candidates)


class UnknownAction(UnknownName):
    kind = "action"


class UnknownShot(UnknownName):
    kind = "shot"


class UnknownPosition(FilmCrewError):
    pass


class ConflictingSuggestions(FilmCrewError):
    pass


# Provider

class ProviderError(FilmCrewError):
    """Non-success response from the chat-completion endpoint."""


class TransportError(ProviderError):
    pass


class AuthError(ProviderError):
    pass


class ReplayExhausted(ProviderError):
    def __init__(self, agent_tag: str, **context: Any):
        super().__init__(f"replay fixture has no more responses for agent '{agent_tag}'", **context)
        self.agent_tag = agent_tag


class NoJsonFound(ProviderError):
    pass


class SchemaRetriesExhausted(ProviderError):
    def __init__(self, attempts: int, last_raw: str, problems: Optional[List[str]] = None, **context: Any):
        detail = "; ".join(problems or []) or "no valid JSON document"
        super().__init__(f"no valid response after {attempts} attempt(s): {detail}", **context)
        self.attempts = attempts
        self.last_raw = last_raw
        self.problems = list(problems or [])


# Collaboration and crew

class AgentError(FilmCrewError):
    def __init__(self, agent_tag: str, phase: str, round: int, cause: Optional[BaseException] = None):
        reason = f": {cause}" if cause is not None else ""
        super().__init__(f"agent '{agent_tag}' failed during {phase} (round {round}){reason}")
        self.agent_tag = agent_tag
        self.phase = phase
        self.round = round


class MissingVariable(FilmCrewError):
    exit_code = 2

    def __init__(self, name: str, **context: Any):
        super().__init__(f"missing template variable '{name}'", **context)
        self.name = name


# Workflow

class ConstraintViolation(FilmCrewError):
    def __init__(self, field: str, message: str, **context: Any):
        super().__init__(f"{field}: {message}", **context)
        self.field = field


class InsertionOutOfRange(FilmCrewError):
    pass


class MergeArityMismatch(FilmCrewError):
    pass


class ValidationGateFailed(FilmCrewError):
    def __init__(self, diagnostics: Sequence[Any], **context: Any):
        lines = "; ".join(f"{d.rule.value} at {d.locus}" for d in diagnostics)
        super().__init__(f"{len(diagnostics)} blocking diagnostic(s): {lines}", **context)
        self.diagnostics = list(diagnostics)
