"""Session and run state for orchestrated searches.

A session owns an append-only history of plans and runs.  State values
are immutable; every change produces a new session snapshot, which keeps
concurrent readers safe and makes persistence round-trips exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Any

from litscout.core.serialize import from_jsonable, parse_instant, to_jsonable
from litscout.core.types import PaperVerdict, QueryPlan, ResearchQuery
from litscout.errors import InvariantError


class SessionStatus(str, Enum):
    READY = "ready"
    FAILED = "failed"


class RunStatus(str, Enum):
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass(frozen=True)
class RunRecord:
    """One execution of a session's latest plan."""

    run_id: str
    plan_version: int
    status: RunStatus
    started_at: datetime
    verdicts: tuple[PaperVerdict, ...] = ()
    finished_at: datetime | None = None
    degraded: bool = False
    error: str | None = None

    def __post_init__(self):
        if not (isinstance(self.run_id, str) and self.run_id):
            raise InvariantError("run_id must be non-empty")
        if not (isinstance(self.plan_version, int) and self.plan_version >= 1):
            raise InvariantError("plan_version must be an integer >= 1")
        if not isinstance(self.status, RunStatus):
            raise InvariantError("status must be a RunStatus")
        object.__setattr__(self, "verdicts", tuple(self.verdicts))
        if self.status is RunStatus.RUNNING and self.finished_at is not None:
            raise InvariantError("a running run has no finished_at")
        if self.status is not RunStatus.RUNNING and self.finished_at is None:
            raise InvariantError("a finished run needs finished_at")


@dataclass(frozen=True)
class SearchSession:
    """Full state of one research-query session."""

    session_id: str
    query: ResearchQuery
    status: SessionStatus
    created_at: datetime
    updated_at: datetime
    plans: tuple[QueryPlan, ...] = ()
    runs: tuple[RunRecord, ...] = ()
    error: str | None = None

    def __post_init__(self):
        if not (isinstance(self.session_id, str) and self.session_id):
            raise InvariantError("session_id must be non-empty")
        if not isinstance(self.status, SessionStatus):
            raise InvariantError("status must be a SessionStatus")
        object.__setattr__(self, "plans", tuple(self.plans))
        object.__setattr__(self, "runs", tuple(self.runs))
        versions = [plan.version for plan in self.plans]
        if versions != sorted(set(versions)):
            raise InvariantError("plan versions must be strictly increasing")
        run_ids = [run.run_id for run in self.runs]
        if len(set(run_ids)) != len(run_ids):
            raise InvariantError("run ids must be unique")

    @property
    def latest_plan(self) -> QueryPlan:
        if not self.plans:
            raise InvariantError("session has no plans")
        return self.plans[-1]

    def find_run(self, run_id: str) -> RunRecord | None:
        for run in self.runs:
            if run.run_id == run_id:
                return run
        return None

    def active_run(self) -> RunRecord | None:
        for run in self.runs:
            if run.status is RunStatus.RUNNING:
                return run
        return None

    def with_plan(self, plan: QueryPlan, at: datetime) -> "SearchSession":
        return replace(self, plans=self.plans + (plan,), updated_at=at)

    def with_run(self, run: RunRecord, at: datetime) -> "SearchSession":
        return replace(self, runs=self.runs + (run,), updated_at=at)

    def with_updated_run(self, run: RunRecord, at: datetime) -> "SearchSession":
        runs = tuple(run if r.run_id == run.run_id else r for r in self.runs)
        if run.run_id not in {r.run_id for r in runs}:
            raise InvariantError(f"no run {run.run_id!r} to update")
        return replace(self, runs=runs, updated_at=at)


def run_to_jsonable(run: RunRecord) -> dict[str, Any]:
    data: dict[str, Any] = {
        "run_id": run.run_id,
        "plan_version": run.plan_version,
        "status": run.status.value,
        "started_at": run.started_at.isoformat(),
        "verdicts": [to_jsonable(v) for v in run.verdicts],
        "degraded": run.degraded,
    }
    if run.finished_at is not None:
        data["finished_at"] = run.finished_at.isoformat()
    if run.error is not None:
        data["error"] = run.error
    return data


def run_from_jsonable(data: dict[str, Any]) -> RunRecord:
    finished = data.get("finished_at")
    return RunRecord(
        run_id=data["run_id"],
        plan_version=data["plan_version"],
        status=RunStatus(data["status"]),
        started_at=parse_instant(data["started_at"]),
        verdicts=tuple(from_jsonable(PaperVerdict, v) for v in data.get("verdicts", ())),
        finished_at=parse_instant(finished) if finished else None,
        degraded=data.get("degraded", False),
        error=data.get("error"),
    )


def session_to_jsonable(session: SearchSession) -> dict[str, Any]:
    data: dict[str, Any] = {
        "session_id": session.session_id,
        "status": session.status.value,
        "query": to_jsonable(session.query),
        "plans": [to_jsonable(plan) for plan in session.plans],
        "runs": [run_to_jsonable(run) for run in session.runs],
        "created_at": session.created_at.isoformat(),
        "updated_at": session.updated_at.isoformat(),
    }
    if session.error is not None:
        data["error"] = session.error
    return data


def session_from_jsonable(data: dict[str, Any]) -> SearchSession:
    return SearchSession(
        session_id=data["session_id"],
        query=from_jsonable(ResearchQuery, data["query"]),
        status=SessionStatus(data["status"]),
        created_at=parse_instant(data["created_at"]),
        updated_at=parse_instant(data["updated_at"]),
        plans=tuple(from_jsonable(QueryPlan, p) for p in data.get("plans", ())),
        runs=tuple(run_from_jsonable(r) for r in data.get("runs", ())),
        error=data.get("error"),
    )
