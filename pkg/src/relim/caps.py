"""Engine resource caps and deadlines.

The quantifier steps of round elimination are exponential; caps keep a
misbehaving request from wedging a session.  Defaults are chosen so that the
worked objects of the acceptance suite (degree 3 and 4) run comfortably.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, replace

from .errors import DeadlineExceededError

ENV_CAPS = "RELIM_CAPS"


@dataclass(frozen=True)
class EngineCaps:
    max_delta_re: int = 6
    max_delta_rere: int = 4
    max_expansion: int = 10**6
    max_labels: int = 4096
    max_states: int = 200_000
    deadline_seconds: float | None = None

    def with_deadline(self, seconds: float | None) -> "EngineCaps":
        return replace(self, deadline_seconds=seconds)


def caps_from_env(base: EngineCaps | None = None) -> EngineCaps:
    """Read cap overrides from the RELIM_CAPS env var (a JSON object)."""
    caps = base or EngineCaps()
    raw = os.environ.get(ENV_CAPS)
    if not raw:
        return caps
    overrides = json.loads(raw)
    return replace(caps, **{k: v for k, v in overrides.items() if hasattr(caps, k)})


class Deadline:
    """Cooperative deadline checked inside engine loops."""

    def __init__(self, seconds: float | None):
        self.expires_at = None if seconds is None else time.monotonic() + seconds

    def check(self, context: str = "engine"):
        if self.expires_at is not None and time.monotonic() > self.expires_at:
            raise DeadlineExceededError(f"deadline exceeded during {context}")
