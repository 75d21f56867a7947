"""Durable session storage: one JSON file per session, atomic writes."""

from __future__ import annotations

import json
import os
import tempfile


class SessionStore:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self.warnings: list[str] = []

    def _path(self, session_id: str) -> str:
        return os.path.join(self.root, f"{session_id}.json")

    def save(self, session_id: str, data: dict):
        payload = json.dumps(data, sort_keys=True, indent=1)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{session_id}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._path(session_id))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def load_all(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        self.warnings = []
        for name in sorted(os.listdir(self.root)):
            if not name.endswith(".json"):
                continue
            path = os.path.join(self.root, name)
            try:
                with open(path, encoding="utf-8") as fh:
                    data = json.load(fh)
                out[data["id"]] = data
            except (json.JSONDecodeError, KeyError, OSError) as e:
                self.warnings.append(f"skipping corrupt session file {name}: {e}")
        return out

    def delete(self, session_id: str):
        path = self._path(session_id)
        if os.path.exists(path):
            os.unlink(path)
