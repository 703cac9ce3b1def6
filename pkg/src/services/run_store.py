"""
Run directory storage: run state and per-stage artifacts.
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

from pydantic import ValidationError

from ..errors import ParseError
from ..models import RunState

logger = logging.getLogger(__name__)

STATE_FILE = "run_state.json"


class RunStore:
    """Files of one production run, kept together in a single directory."""

    def __init__(self, run_dir: Union[str, Path]):
        self.run_dir = Path(run_dir)
        self._ensure_storage_directory()

    @classmethod
    def for_run(cls, runs_directory: Union[str, Path], state: RunState) -> "RunStore":
        return cls(Path(runs_directory) / state.run_id)

    def _ensure_storage_directory(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)

    def _get_artifact_path(self, name: str) -> Path:
        return self.run_dir / name

    def exists(self, name: str) -> bool:
        return self._get_artifact_path(name).exists()

    def save_state(self, state: RunState) -> Path:
        path = self._get_artifact_path(STATE_FILE)
        path.write_text(state.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def load_state(self) -> RunState:
        path = self._get_artifact_path(STATE_FILE)
        if not path.exists():
            raise ParseError("no run state in directory", locus=str(self.run_dir))
        try:
            return RunState.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ParseError(f"bad run state: {exc.errors()[0]['msg']}", locus=str(path))

    def write_text(self, name: str, text: str) -> str:
        self._get_artifact_path(name).write_text(text, encoding="utf-8")
        logger.debug(f"Wrote {self.run_dir / name}")
        return name

    def write_json(self, name: str, document: Any) -> str:
        return self.write_text(name, json.dumps(document, indent=4, ensure_ascii=False) + "\n")

    def read_text(self, name: str) -> str:
        path = self._get_artifact_path(name)
        if not path.exists():
            raise ParseError("artifact missing from run directory", locus=str(path))
        return path.read_text(encoding="utf-8")

    def read_json(self, name: str) -> Any:
        text = self.read_text(name)
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, locus=f"{self.run_dir / name}:{exc.lineno}:{exc.colno}")
