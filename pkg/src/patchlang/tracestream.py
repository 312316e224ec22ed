"""Buffered, replayable trace sessions.

A session owns the append-only event sequence of one run plus its
terminal status: finished (with outputs), failed (with an error), or
stopped (killed from outside). One producer appends; any number of
consumers subscribe, each receiving the full in-order feed from their
chosen starting sequence number, live until the session ends. Sessions
are bounded in memory; overflowing the buffer fails the run loudly
instead of silently dropping events.
"""

from __future__ import annotations

import itertools
import threading
from typing import Any, Iterator, Optional

from .errors import EvalError, PatchError
from .document import render_value
from .interpreter import TraceEvent

RUNNING = "running"
FINISHED = "finished"
FAILED = "failed"
STOPPED = "stopped"

DEFAULT_BUFFER_CAP = 1_000_000

_VALUE_FIELDS = ("old", "new", "lhs", "rhs", "value", "result")


def event_to_wire(ev: TraceEvent) -> dict[str, Any]:
    """JSON shape of one event; payload values use the literal syntax."""
    data: dict[str, Any] = {}
    for k, v in ev.data.items():
        if k in _VALUE_FIELDS:
            data[k] = None if v is None else render_value(v)
        else:
            data[k] = v
    out: dict[str, Any] = {
        "seq": ev.seq,
        "module": ev.module,
        "step": ev.step_id,
        "kind": ev.kind,
        "data": data,
    }
    if ev.snapshot is not None:
        out["snapshot"] = {k: render_value(v)
                           for k, v in sorted(ev.snapshot.items())}
    return out


class TraceSession:
    """One run's event buffer and status, safe for one producer and many
    consumers."""

    def __init__(self, session_id: str, buffer_cap: int = DEFAULT_BUFFER_CAP):
        self.session_id = session_id
        self.buffer_cap = buffer_cap
        self.events: list[TraceEvent] = []
        self.status = RUNNING
        self.outputs: Optional[dict[str, Any]] = None
        self.error: Optional[str] = None
        self.error_code: Optional[str] = None
        self._cond = threading.Condition()
        self._stop_requested = False

    # -- producer side

    def append(self, ev: TraceEvent) -> None:
        with self._cond:
            if self.status != RUNNING:
                return
            if len(self.events) >= self.buffer_cap:
                self.status = FAILED
                self.error = "trace buffer overflow"
                self.error_code = "budget-exceeded"
                self._cond.notify_all()
                raise EvalError("budget-exceeded",
                                f"trace buffer cap of {self.buffer_cap} "
                                "exceeded")
            self.events.append(ev)
            self._cond.notify_all()

    def finish(self, outputs: dict[str, Any]) -> None:
        self._terminate(FINISHED, outputs=outputs)

    def fail(self, error: PatchError | str) -> None:
        code = error.code if isinstance(error, PatchError) else None
        self._terminate(FAILED, error=str(error), error_code=code)

    def stopped(self) -> None:
        self._terminate(STOPPED)

    def _terminate(self, status: str, outputs=None, error=None,
                   error_code=None) -> None:
        with self._cond:
            if self.status != RUNNING:
                return
            self.status = status
            self.outputs = outputs
            self.error = error
            self.error_code = error_code
            self._cond.notify_all()

    # -- consumer side

    def request_stop(self) -> None:
        with self._cond:
            self._stop_requested = True

    def stop_requested(self) -> bool:
        with self._cond:
            return self._stop_requested

    def terminal(self) -> bool:
        with self._cond:
            return self.status != RUNNING

    def wait_terminal(self, timeout: float | None = None) -> str:
        with self._cond:
            self._cond.wait_for(lambda: self.status != RUNNING,
                                timeout=timeout)
            return self.status


class Feed:
    """In-order event iterator over one session, live until terminal.

    After exhaustion, ``terminal_status`` holds the session's final
    status.
    """

    def __init__(self, session: TraceSession, from_seq: int = 1):
        self.session = session
        self.from_seq = from_seq
        self.terminal_status: Optional[str] = None

    def __iter__(self) -> Iterator[TraceEvent]:
        s = self.session
        idx = 0
        while True:
            with s._cond:
                s._cond.wait_for(
                    lambda: len(s.events) > idx or s.status != RUNNING)
                batch = s.events[idx:]
                idx += len(batch)
                done = s.status != RUNNING and idx >= len(s.events)
                status = s.status
            for ev in batch:
                if ev.seq >= self.from_seq:
                    yield ev
            if done:
                self.terminal_status = status
                return


class SessionStore:
    """Registry of live and finished sessions."""

    def __init__(self, buffer_cap: int = DEFAULT_BUFFER_CAP):
        self._sessions: dict[str, TraceSession] = {}
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self.buffer_cap = buffer_cap

    def create(self) -> TraceSession:
        with self._lock:
            sid = f"run-{next(self._ids)}"
            session = TraceSession(sid, buffer_cap=self.buffer_cap)
            self._sessions[sid] = session
            return session

    def get(self, session_id: str) -> TraceSession:
        with self._lock:
            if session_id not in self._sessions:
                raise EvalError("unknown-session",
                                f"no session {session_id!r}")
            return self._sessions[session_id]


def subscribe(store: SessionStore, session_id: str, from_seq: int = 1) -> Feed:
    """Feed of a session's events with seq >= from_seq, live until the
    session ends. Unknown ids raise unknown-session."""
    return Feed(store.get(session_id), from_seq)


def summarize(session: TraceSession) -> dict[str, int]:
    """Event-kind counts of a terminal session."""
    if not session.terminal():
        raise EvalError("session-running",
                        "summary needs a terminal session")
    counts: dict[str, int] = {}
    for ev in session.events:
        counts[ev.kind] = counts.get(ev.kind, 0) + 1
    return counts
