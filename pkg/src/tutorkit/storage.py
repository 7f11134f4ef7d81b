"""Durable per-student storage: append-only event logs plus JSON snapshots.

Layout under the store root:

    students/<student_id>/events.ndjson   one event per line, append-only
    students/<student_id>/profile.json    latest student-model snapshot
    students/<student_id>/journey.json    latest journey-state snapshot
    tokens.json                           API token -> student_id map

Snapshots are a convenience; the event log is the source of truth and a
journey can always be rebuilt by replaying it.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

from .errors import ValidationError
from .orchestrator import SessionEvent

_STUDENT_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,63}$")


def _check_student_id(student_id: str) -> str:
    if not isinstance(student_id, str) or not _STUDENT_ID_RE.match(student_id):
        raise ValidationError(
            "student_id must be 1-64 characters of letters, digits, '_', '.' or '-'"
        )
    return student_id


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class EventStore:
    """Filesystem-backed persistence for student journeys."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "students").mkdir(exist_ok=True)

    def _student_dir(self, student_id: str, create: bool = False) -> Path:
        path = self.root / "students" / _check_student_id(student_id)
        if create:
            path.mkdir(parents=True, exist_ok=True)
        return path

    def list_students(self) -> list[str]:
        base = self.root / "students"
        return sorted(p.name for p in base.iterdir() if p.is_dir())

    def has_student(self, student_id: str) -> bool:
        return self._student_dir(student_id).is_dir()

    def append_events(self, student_id: str, events):
        path = self._student_dir(student_id, create=True) / "events.ndjson"
        lines = "".join(json.dumps(e.to_dict(), ensure_ascii=False) + "\n" for e in events)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(lines)
            handle.flush()
            os.fsync(handle.fileno())

    def read_events(self, student_id: str) -> list[SessionEvent]:
        path = self._student_dir(student_id) / "events.ndjson"
        if not path.exists():
            return []
        events = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    events.append(SessionEvent.from_dict(json.loads(line)))
        return events

    def write_snapshot(self, student_id: str, profile_doc: dict, journey_doc: dict):
        folder = self._student_dir(student_id, create=True)
        _write_atomic(folder / "profile.json", json.dumps(profile_doc, ensure_ascii=False, indent=2))
        _write_atomic(folder / "journey.json", json.dumps(journey_doc, ensure_ascii=False, indent=2))

    def read_snapshot(self, student_id: str):
        folder = self._student_dir(student_id)
        profile_path = folder / "profile.json"
        journey_path = folder / "journey.json"
        if not profile_path.exists() or not journey_path.exists():
            return None
        with open(profile_path, encoding="utf-8") as handle:
            profile_doc = json.load(handle)
        with open(journey_path, encoding="utf-8") as handle:
            journey_doc = json.load(handle)
        return profile_doc, journey_doc

    def read_tokens(self) -> dict:
        path = self.root / "tokens.json"
        if not path.exists():
            return {}
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)

    def write_tokens(self, tokens: dict):
        _write_atomic(self.root / "tokens.json", json.dumps(tokens, indent=2))

    def read_aux(self, student_id: str, name: str) -> dict:
        """Read a per-student auxiliary JSON document (empty dict if absent)."""
        path = self._student_dir(student_id) / f"{name}.json"
        if not path.exists():
            return {}
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)

    def write_aux(self, student_id: str, name: str, doc: dict):
        folder = self._student_dir(student_id, create=True)
        _write_atomic(folder / f"{name}.json", json.dumps(doc, ensure_ascii=False, indent=2))
