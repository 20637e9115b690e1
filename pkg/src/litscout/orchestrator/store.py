"""Durable session storage as per-session append-only event logs.

Each session lives in one JSONL file of canonical-JSON events:
``created``, ``plan-added``, ``run-started``, ``verdict-appended``, and
``run-finished``.  Loading replays the events; a corrupt line raises an
error naming that line while exposing the state recovered from the
preceding lines, and a reader that catches a log mid-append simply sees a
valid prefix.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Any

from litscout.core.serialize import canonical_json, from_jsonable, parse_instant, to_jsonable
from litscout.core.types import PaperVerdict, QueryPlan, ResearchQuery
from litscout.errors import SessionLogError, SessionNotFoundError
from litscout.orchestrator.sessions import (
    RunRecord,
    RunStatus,
    SearchSession,
    SessionStatus,
)

_SESSION_ID = re.compile(r"^[A-Za-z0-9_-]{1,64}$")

EVENT_KINDS = ("created", "plan-added", "run-started", "verdict-appended", "run-finished")


class SessionStore:
    """File-backed store keeping one event log per session."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        if not _SESSION_ID.match(session_id or ""):
            raise SessionNotFoundError(session_id)
        return self.root / f"{session_id}.jsonl"

    def exists(self, session_id: str) -> bool:
        try:
            return self.path_for(session_id).is_file()
        except SessionNotFoundError:
            return False

    def session_ids(self) -> list[str]:
        return sorted(path.stem for path in self.root.glob("*.jsonl"))

    def append_event(self, session_id: str, event: dict[str, Any]) -> None:
        line = canonical_json(event)
        with open(self.path_for(session_id), "a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def load(self, session_id: str) -> SearchSession:
        """Replay a session's event log.

        Raises :class:`SessionNotFoundError` for an unknown id and
        :class:`SessionLogError` (carrying the recoverable prefix state)
        for a corrupt log.
        """
        path = self.path_for(session_id)
        if not path.is_file():
            raise SessionNotFoundError(session_id)
        replayer = _Replayer(session_id)
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                replayer.feed(line, line_no)
        return replayer.finish()

    def persist(self, session: SearchSession) -> Path:
        """Write a session snapshot as a fresh event log, atomically."""
        path = self.path_for(session.session_id)
        events = derive_events(session)
        tmp = path.with_suffix(".jsonl.tmp")
        with open(tmp, "w", encoding="utf-8") as handle:
            for event in events:
                handle.write(canonical_json(event) + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
        return path


def derive_events(session: SearchSession) -> list[dict[str, Any]]:
    """Event sequence that replays to exactly this session state.

    Plans are interleaved before the first run that references their
    version, which reconstructs chronological order (edits are impossible
    while a run is active).  The final event carries the session's
    ``updated_at`` so replay restores it; plan events otherwise use the
    best-known surrounding time, which replay does not depend on.
    """
    events: list[dict[str, Any]] = []
    created: dict[str, Any] = {
        "event": "created",
        "ts": session.created_at.isoformat(),
        "session_id": session.session_id,
        "status": session.status.value,
        "query": to_jsonable(session.query),
    }
    if session.error is not None:
        created["error"] = session.error
    events.append(created)

    plans = list(session.plans)
    emitted = 0
    current_ts = session.created_at

    def emit_plans(up_to_version: int | None) -> None:
        nonlocal emitted
        while emitted < len(plans) and (
            up_to_version is None or plans[emitted].version <= up_to_version
        ):
            events.append(
                {
                    "event": "plan-added",
                    "ts": current_ts.isoformat(),
                    "plan": to_jsonable(plans[emitted]),
                }
            )
            emitted += 1

    for run in session.runs:
        emit_plans(run.plan_version)
        events.append(
            {
                "event": "run-started",
                "ts": run.started_at.isoformat(),
                "run_id": run.run_id,
                "plan_version": run.plan_version,
            }
        )
        verdict_ts = (run.finished_at or run.started_at).isoformat()
        for verdict in run.verdicts:
            events.append(
                {
                    "event": "verdict-appended",
                    "ts": verdict_ts,
                    "run_id": run.run_id,
                    "verdict": to_jsonable(verdict),
                }
            )
        if run.status is not RunStatus.RUNNING:
            finished: dict[str, Any] = {
                "event": "run-finished",
                "ts": run.finished_at.isoformat(),
                "run_id": run.run_id,
                "status": run.status.value,
                "order": [v.paper_id for v in run.verdicts],
                "degraded": run.degraded,
            }
            if run.error is not None:
                finished["error"] = run.error
            events.append(finished)
            current_ts = run.finished_at
        else:
            current_ts = run.started_at
    emit_plans(None)
    events[-1]["ts"] = session.updated_at.isoformat()
    return events


class _Replayer:
    """Incremental event-log replay with prefix recovery."""

    def __init__(self, session_id: str):
        self.session_id = session_id
        self.session: SearchSession | None = None
        self.last_line = 0

    def feed(self, line: str, line_no: int) -> None:
        self.last_line = line_no
        try:
            event = json.loads(line)
        except Exception as exc:
            self._corrupt(line_no, f"invalid JSON: {exc}")
        if not isinstance(event, dict):
            self._corrupt(line_no, "event must be a JSON object")
        try:
            self._apply(event)
        except SessionLogError:
            raise
        except Exception as exc:
            self._corrupt(line_no, f"bad {event.get('event', 'unknown')!r} event: {exc}")

    def finish(self) -> SearchSession:
        if self.session is None:
            raise SessionLogError("log has no creation event", max(self.last_line, 1), None)
        return self.session

    def _corrupt(self, line_no: int, message: str) -> None:
        raise SessionLogError(message, line_no, self.session)

    def _apply(self, event: dict[str, Any]) -> None:
        kind = event.get("event")
        ts = parse_instant(event["ts"])
        if kind == "created":
            if self.session is not None:
                raise ValueError("duplicate creation event")
            if event["session_id"] != self.session_id:
                raise ValueError(
                    f"log carries session_id {event['session_id']!r}, expected {self.session_id!r}"
                )
            self.session = SearchSession(
                session_id=self.session_id,
                query=from_jsonable(ResearchQuery, event["query"]),
                status=SessionStatus(event["status"]),
                created_at=ts,
                updated_at=ts,
                plans=(),
                runs=(),
                error=event.get("error"),
            )
            return
        if self.session is None:
            raise ValueError("log does not start with a creation event")
        session = self.session
        if kind == "plan-added":
            plan = from_jsonable(QueryPlan, event["plan"])
            if session.plans and plan.version <= session.plans[-1].version:
                raise ValueError(
                    f"plan version {plan.version} does not increase on {session.plans[-1].version}"
                )
            self.session = _rebuild(session, plans=session.plans + (plan,), updated_at=ts)
        elif kind == "run-started":
            run_id = event["run_id"]
            if session.find_run(run_id) is not None:
                raise ValueError(f"duplicate run id {run_id!r}")
            if session.active_run() is not None:
                raise ValueError("a run started while another was active")
            version = event["plan_version"]
            if version not in {plan.version for plan in session.plans}:
                raise ValueError(f"run references unknown plan version {version}")
            run = RunRecord(
                run_id=run_id,
                plan_version=version,
                status=RunStatus.RUNNING,
                started_at=ts,
            )
            self.session = _rebuild(session, runs=session.runs + (run,), updated_at=ts)
        elif kind == "verdict-appended":
            run = session.find_run(event["run_id"])
            if run is None or run.status is not RunStatus.RUNNING:
                raise ValueError(f"verdict for unknown or finished run {event['run_id']!r}")
            verdict = from_jsonable(PaperVerdict, event["verdict"])
            if any(v.paper_id == verdict.paper_id for v in run.verdicts):
                raise ValueError(f"duplicate verdict for paper {verdict.paper_id!r}")
            updated = _rebuild_run(run, verdicts=run.verdicts + (verdict,))
            self.session = session.with_updated_run(updated, ts)
        elif kind == "run-finished":
            run = session.find_run(event["run_id"])
            if run is None or run.status is not RunStatus.RUNNING:
                raise ValueError(f"finish for unknown or finished run {event['run_id']!r}")
            status = RunStatus(event["status"])
            if status is RunStatus.RUNNING:
                raise ValueError("run-finished cannot leave a run running")
            order = event.get("order", [])
            by_paper = {v.paper_id: v for v in run.verdicts}
            if sorted(order) != sorted(by_paper):
                raise ValueError("final order does not match the appended verdicts")
            verdicts = tuple(by_paper[paper_id] for paper_id in order)
            updated = _rebuild_run(
                run,
                status=status,
                verdicts=verdicts,
                finished_at=ts,
                degraded=event.get("degraded", False),
                error=event.get("error"),
            )
            self.session = session.with_updated_run(updated, ts)
        else:
            raise ValueError(f"unknown event kind {kind!r}")


def _rebuild(session: SearchSession, **changes: Any) -> SearchSession:
    from dataclasses import replace

    return replace(session, **changes)


def _rebuild_run(run: RunRecord, **changes: Any) -> RunRecord:
    from dataclasses import replace

    return replace(run, **changes)
