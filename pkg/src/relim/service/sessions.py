"""Sessions: a persisted history of problem snapshots and applied actions.

History is append-only from the client's view, with branch-on-edit: applying
an action while the cursor sits mid-history truncates everything after the
cursor first.  Read-only actions keep the snapshot of their predecessor so
that replaying the whole log reproduces every snapshot byte for byte.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from ..caps import EngineCaps
from ..errors import RelimError
from .ops import execute_op
from .store import SessionStore

READ_ONLY_OPS = {"fixed-point-check", "diagram", "zero-round", "calculate", "simulate", "verify"}


@dataclass
class HistoryEntry:
    problem: str
    action: dict
    summary: dict
    timestamp: float

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "action": self.action,
            "summary": self.summary,
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_json(data: dict) -> "HistoryEntry":
        return HistoryEntry(
            problem=data["problem"],
            action=data["action"],
            summary=data.get("summary", {}),
            timestamp=data.get("timestamp", 0.0),
        )


@dataclass
class Session:
    id: str
    name: str = ""
    notes: str = ""
    history: list[HistoryEntry] = field(default_factory=list)
    cursor: int = 0
    created: float = 0.0
    updated: float = 0.0

    def snapshot(self) -> str:
        return self.history[self.cursor].problem

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "notes": self.notes,
            "cursor": self.cursor,
            "created": self.created,
            "updated": self.updated,
            "history": [h.to_json() for h in self.history],
        }

    def view(self) -> dict:
        data = self.to_json()
        data["snapshot"] = self.snapshot()
        return data

    def summary(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "cursor": self.cursor,
            "length": len(self.history),
            "updated": self.updated,
        }

    @staticmethod
    def from_json(data: dict) -> "Session":
        return Session(
            id=data["id"],
            name=data.get("name", ""),
            notes=data.get("notes", ""),
            history=[HistoryEntry.from_json(h) for h in data.get("history", [])],
            cursor=data.get("cursor", 0),
            created=data.get("created", 0.0),
            updated=data.get("updated", 0.0),
        )


class SessionManager:
    """Multi-session registry with per-session mutual exclusion."""

    def __init__(self, store_path: str, caps: EngineCaps | None = None):
        self.store = SessionStore(store_path)
        self.caps = caps or EngineCaps()
        self.sessions: dict[str, Session] = {
            sid: Session.from_json(data) for sid, data in self.store.load_all().items()
        }
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, session_id: str) -> threading.RLock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.RLock())

    def _get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def create(self, initial: dict, name: str = "", notes: str = "") -> Session:
        """initial: {"text": ...} or {"family": {"delta": d, "z": [...]}}"""
        if "family" in initial:
            snapshot, summary = execute_op(
                "family-build", initial["family"], None, self.caps
            )
            action = {"op": "family-build", "params": initial["family"]}
        else:
            snapshot, summary = execute_op(
                "parse", {"text": initial["text"]}, None, self.caps
            )
            action = {"op": "parse", "params": {"text": initial["text"]}}
        now = time.time()
        session = Session(
            id=uuid.uuid4().hex,
            name=name,
            notes=notes,
            history=[HistoryEntry(snapshot, action, summary, now)],
            cursor=0,
            created=now,
            updated=now,
        )
        with self._registry_lock:
            self.sessions[session.id] = session
        self.store.save(session.id, session.to_json())
        return session

    def list(self) -> list[dict]:
        return [
            s.summary()
            for s in sorted(self.sessions.values(), key=lambda s: -s.updated)
        ]

    def get(self, session_id: str) -> Session:
        return self._get(session_id)

    def seek(self, session_id: str, cursor: int) -> Session:
        with self._lock(session_id):
            session = self._get(session_id)
            if not 0 <= cursor < len(session.history):
                raise IndexError(cursor)
            session.cursor = cursor
            session.updated = time.time()
            self.store.save(session.id, session.to_json())
            return session

    def fork(self, session_id: str, name: str = "") -> Session:
        with self._lock(session_id):
            source = self._get(session_id)
            now = time.time()
            clone = Session(
                id=uuid.uuid4().hex,
                name=name or f"{source.name or source.id[:8]} (fork)",
                notes=source.notes,
                history=[
                    HistoryEntry.from_json(h.to_json())
                    for h in source.history[: source.cursor + 1]
                ],
                cursor=source.cursor,
                created=now,
                updated=now,
            )
        with self._registry_lock:
            self.sessions[clone.id] = clone
        self.store.save(clone.id, clone.to_json())
        return clone

    def apply_action(self, session_id: str, op: str, params: dict) -> dict:
        with self._lock(session_id):
            session = self._get(session_id)
            snapshot, summary = execute_op(
                op, params, session.snapshot(), self.caps
            )
            if op == "relax" and params.get("check_only"):
                # a dry run is a query, not a history event
                return {
                    "index": session.cursor,
                    "snapshot": session.snapshot(),
                    "summary": summary,
                }
            # branch-on-edit: drop any redo tail before appending
            session.history = session.history[: session.cursor + 1]
            new_snapshot = snapshot if snapshot is not None else session.snapshot()
            entry = HistoryEntry(
                problem=new_snapshot,
                action={"op": op, "params": params},
                summary=summary,
                timestamp=time.time(),
            )
            session.history.append(entry)
            session.cursor = len(session.history) - 1
            session.updated = entry.timestamp
            self.store.save(session.id, session.to_json())
            return {
                "index": session.cursor,
                "snapshot": new_snapshot,
                "summary": summary,
            }

    def replay(self, session_id: str) -> dict:
        """Re-execute the whole action log and diff the recorded snapshots."""
        session = self._get(session_id)
        diffs = []
        current: str | None = None
        for i, entry in enumerate(session.history):
            op, params = entry.action["op"], entry.action["params"]
            try:
                snapshot, _ = execute_op(op, params, current, self.caps)
            except RelimError as e:
                diffs.append({"index": i, "error": e.message})
                break
            expected = snapshot if snapshot is not None else current
            if expected != entry.problem:
                diffs.append({"index": i, "recorded": entry.problem, "replayed": expected})
            current = entry.problem
        return {"ok": not diffs, "diffs": diffs}
