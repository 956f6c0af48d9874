"""Session events: the replayable record of everything an operator did.

One JSON object per line, strictly ordered by `t`. The log is the input
to replay and the source for the objective metrics.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass

KIND_POINTER = "pointer_sample"
KIND_UTTERANCE_START = "utterance_start"
KIND_UTTERANCE_TEXT = "utterance_text"
KIND_UTTERANCE_END = "utterance_end"
KIND_MODE_CHANGE = "mode_change"
KIND_OUTCOME = "outcome"
KIND_ROBOT_POSE = "robot_pose"

ALL_KINDS = frozenset({
    KIND_POINTER,
    KIND_UTTERANCE_START,
    KIND_UTTERANCE_TEXT,
    KIND_UTTERANCE_END,
    KIND_MODE_CHANGE,
    KIND_OUTCOME,
    KIND_ROBOT_POSE,
})


class SessionLogError(Exception):
    """Malformed session log; message names the offending event index."""


@dataclass(frozen=True)
class SessionEvent:
    t: float
    kind: str
    payload: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {"t": self.t, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )


def parse_event(line: str, index: int) -> SessionEvent:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SessionLogError(f"event {index}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SessionLogError(f"event {index}: expected a JSON object")
    t = obj.get("t")
    kind = obj.get("kind")
    payload = obj.get("payload")
    if not isinstance(t, (int, float)):
        raise SessionLogError(f"event {index}: missing numeric t")
    if kind not in ALL_KINDS:
        raise SessionLogError(f"event {index}: unknown kind {kind!r}")
    if not isinstance(payload, dict):
        raise SessionLogError(f"event {index}: payload must be an object")
    return SessionEvent(float(t), kind, payload)


def read_session(path: str) -> list[SessionEvent]:
    """Load and validate a session log: ordering and utterance nesting."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line for line in f.read().splitlines() if line.strip()]
    events = [parse_event(line, i) for i, line in enumerate(lines)]

    prev_t = float("-inf")
    open_utterance = False
    for i, ev in enumerate(events):
        if ev.t <= prev_t:
            raise SessionLogError(f"event {i}: t={ev.t} not strictly after {prev_t}")
        prev_t = ev.t
        if ev.kind == KIND_UTTERANCE_START:
            if open_utterance:
                raise SessionLogError(f"event {i}: utterance_start inside an open utterance")
            open_utterance = True
        elif ev.kind == KIND_UTTERANCE_END:
            if not open_utterance:
                raise SessionLogError(f"event {i}: utterance_end without utterance_start")
            open_utterance = False
        elif ev.kind == KIND_UTTERANCE_TEXT and not open_utterance:
            raise SessionLogError(f"event {i}: utterance_text outside an utterance")
    if open_utterance:
        raise SessionLogError(f"event {len(events) - 1}: utterance never closed")
    return events


class SessionLog:
    """Append-only JSONL writer, safe to share between handler threads."""

    def __init__(self, path: str):
        self.path = path
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        self._lock = threading.Lock()
        self._f = open(path, "a", encoding="utf-8")

    def append(self, event: SessionEvent) -> None:
        with self._lock:
            self._f.write(event.to_json_line())
            self._f.write("\n")
            self._f.flush()

    def close(self) -> None:
        with self._lock:
            self._f.close()
