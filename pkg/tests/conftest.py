"""
Shared fixtures: the shipped environment and templates, golden scripts and replay builders.
"""

import copy
import json
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import pytest

from src.config import Settings
from src.models import AnnotatedScript, ProviderCallRecord, Role, RoleAgent, RunState
from src.services.crew import Crew, TemplateLibrary
from src.services.environment import load_environment
from src.services.provider import ReplayProvider
from src.services.run_store import RunStore
from src.services.script_codec import parse_document
from src.services.transcript import Transcript
from src.services.workflow import Production

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
FULL_ENVIRONMENT = REPO_ROOT / "environment" / "full.json"
LIVINGROOM_ENVIRONMENT = REPO_ROOT / "environment" / "livingroom.json"
PROMPTS = REPO_ROOT / "prompts"
BREAKUP_REPLAY = REPO_ROOT / "fixtures" / "breakup"


def load_fixture(name: str) -> Any:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def env():
    return load_environment(FULL_ENVIRONMENT)


@pytest.fixture(scope="session")
def library():
    return TemplateLibrary.load(PROMPTS)


@pytest.fixture
def golden_document() -> Dict[str, Any]:
    return load_fixture("golden_script.json")


@pytest.fixture
def golden(golden_document) -> AnnotatedScript:
    return parse_document(golden_document)


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(
        environment_path=str(FULL_ENVIRONMENT),
        template_directory=str(PROMPTS),
        runs_directory=str(tmp_path / "runs"),
        backoff_seconds=0.0,
    )


def records(responses: Sequence[Tuple[str, Any]]) -> List[ProviderCallRecord]:
    """Replay records from (agent tag, response) pairs, indexed in order."""
    return [
        ProviderCallRecord(call_index=index, agent_tag=tag, response=response)
        for index, (tag, response) in enumerate(responses)
    ]


@pytest.fixture
def replay() -> Callable[..., ReplayProvider]:
    def build(responses: Sequence[Tuple[str, Any]]) -> ReplayProvider:
        return ReplayProvider(records(responses), Transcript())
    return build


@pytest.fixture
def crew(library, replay) -> Callable[..., Crew]:
    def build(responses: Sequence[Tuple[str, Any]], json_attempts: int = 3) -> Crew:
        return Crew(replay(responses), library, json_attempts)
    return build


@pytest.fixture
def director() -> RoleAgent:
    return RoleAgent(role=Role.DIRECTOR, tag="director")


@pytest.fixture
def screenwriter() -> RoleAgent:
    return RoleAgent(role=Role.SCREENWRITER, tag="screenwriter")


@pytest.fixture
def production(settings, env, library, replay, tmp_path) -> Callable[..., Production]:
    """A production over a fresh run directory, served by the given responses."""
    def build(responses: Sequence[Tuple[str, Any]], topic: str = "a quarrel and breakup scene", **overrides) -> Production:
        run_settings = settings.model_copy(update=overrides) if overrides else settings
        state = RunState(topic=topic)
        store = RunStore(tmp_path / "run")
        return Production(run_settings, env, library, replay(responses), store, state)
    return build


def mutate(document: Any, path: str, value: Any) -> Any:
    """Copy of ``document`` with the dotted ``path`` set to ``value``."""
    result = copy.deepcopy(document)
    parts = path.split(".")
    node = result
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
    return result
