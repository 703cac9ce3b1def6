"""
Run transcript: every chat-completion call, persisted as transcript.jsonl.
"""

import json
import logging
import threading
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from pydantic import ValidationError

from ..errors import ParseError
from ..models import ProviderCallRecord

logger = logging.getLogger(__name__)

TRANSCRIPT_FILE = "transcript.jsonl"


class Transcript:
    """Thread-safe, append-only record of provider calls ordered by call index."""

    def __init__(self, path: Optional[Union[str, Path]] = None, records: Iterable[ProviderCallRecord] = ()):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._records: List[ProviderCallRecord] = sorted(records, key=lambda r: r.call_index)
        self._next_index = self._records[-1].call_index + 1 if self._records else 0

    def reserve_index(self) -> int:
        """Claim the next call index when a call starts."""
        with self._lock:
            index = self._next_index
            self._next_index += 1
            return index

    def append(self, record: ProviderCallRecord) -> None:
        with self._lock:
            self._records.append(record)
            self._records.sort(key=lambda r: r.call_index)
            self._persist()

    def _persist(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            for record in self._records:
                f.write(record.model_dump_json(exclude_none=True) + "\n")

    def save(self, path: Union[str, Path]) -> Path:
        """Write a copy elsewhere, e.g. as a replay fixture."""
        target = Path(path)
        if target.suffix != ".jsonl":
            target = target / TRANSCRIPT_FILE
        target.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            lines = [record.model_dump_json(exclude_none=True) + "\n" for record in self._records]
        target.write_text("".join(lines), encoding="utf-8")
        return target

    @property
    def records(self) -> List[ProviderCallRecord]:
        with self._lock:
            return list(self._records)

    def counts_by_tag(self) -> Dict[str, int]:
        with self._lock:
            return dict(Counter(record.agent_tag for record in self._records if not record.failed))

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    @classmethod
    def load(cls, path: Union[str, Path], keep: Optional[int] = None) -> "Transcript":
        """Reload a persisted transcript, keeping only the first ``keep`` records."""
        path = Path(path)
        records = load_records(path) if path.exists() else []
        if keep is not None:
            records = records[:keep]
        transcript = cls(path=path, records=records)
        with transcript._lock:
            transcript._persist()
        return transcript


def load_records(path: Union[str, Path]) -> List[ProviderCallRecord]:
    """Read records from a transcript file or from a directory holding transcript.jsonl."""
    path = Path(path)
    if path.is_dir():
        path = path / TRANSCRIPT_FILE
    if not path.exists():
        raise ParseError("transcript not found", locus=str(path))

    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(ProviderCallRecord.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as exc:
                raise ParseError(f"bad transcript record: {exc}", locus=f"{path}:{line_number}")
    records.sort(key=lambda r: r.call_index)
    logger.debug(f"Loaded {len(records)} transcript record(s) from {path}")
    return records
