"""
Robust JSON extraction from model replies.

Fallback order:
  1. Fenced code blocks (```json ... ```), then the whole reply
  2. Direct parse
  3. Each balanced {...} or [...] span, raw, then without trailing commas,
     then with Python literals (True/False/None) normalized
"""

import json
import re
from typing import Any, Iterator, List, Optional

from ..errors import NoJsonFound

_FENCE = re.compile(r"```(?:json|JSON)?[ \t]*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",\s*([}\]])")
_PY_LITERALS = re.compile(r"(?<![\w\"])(True|False|None)(?![\w\"])")
_LITERAL_MAP = {"True": "true", "False": "false", "None": "null"}


def _loads(text: str) -> Optional[Any]:
    try:
        value = json.loads(text)
    except (json.JSONDecodeError, ValueError):
        return None
    return value if isinstance(value, (dict, list)) else None


def _balanced_end(text: str, start: int) -> Optional[int]:
    """Index one past the bracket closing text[start], honouring strings."""
    closers = {"{": "}", "[": "]"}
    stack: List[str] = []
    in_string = False
    escaped = False
    for index in range(start, len(text)):
        char = text[index]
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
            continue
        if char == '"':
            in_string = True
        elif char in closers:
            stack.append(closers[char])
        elif char in "}]":
            if not stack or stack.pop() != char:
                return None
            if not stack:
                return index + 1
    return None


def _repairs(span: str) -> Iterator[str]:
    yield span
    without_commas = _TRAILING_COMMA.sub(r"\1", span)
    yield without_commas
    yield _PY_LITERALS.sub(lambda m: _LITERAL_MAP[m.group(1)], without_commas)


def _from_text(text: str) -> Optional[Any]:
    direct = _loads(text.strip())
    if direct is not None:
        return direct
    for start, char in enumerate(text):
        if char not in "{[":
            continue
        end = _balanced_end(text, start)
        if end is None:
            continue
        for candidate in _repairs(text[start:end]):
            value = _loads(candidate)
            if value is not None:
                return value
    return None


def extract_json(raw: str) -> Any:
    """Return the first JSON object or array found in a model reply.

    Raises NoJsonFound when nothing parses.
    """
    candidates = [match.group(1) for match in _FENCE.finditer(raw)]
    candidates.append(raw)
    for candidate in candidates:
        value = _from_text(candidate)
        if value is not None:
            return value
    excerpt = raw.strip().replace("\n", " ")[:80]
    raise NoJsonFound(f"no JSON object or array in reply: '{excerpt}'")
