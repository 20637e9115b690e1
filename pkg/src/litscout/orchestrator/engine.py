"""The orchestrator ties planning, retrieval, and validation to sessions.

All state changes append events to the session store first, then update
the in-memory snapshot, so a crash never loses acknowledged state and a
concurrent reader of the log sees a valid prefix.
"""

from __future__ import annotations

import secrets
import threading
from datetime import datetime, timezone
from typing import Any, Callable, Sequence

from litscout.core.serialize import to_jsonable
from litscout.core.types import PaperMetadata, PaperVerdict, ResearchQuery
from litscout.errors import (
    BackendConfigError,
    LitScoutError,
    SessionConflictError,
    SessionNotFoundError,
)
from litscout.llmgate import Backend
from litscout.planner import EditCommand, apply_edits, generate_plan
from litscout.retrieval import (
    CorpusIndex,
    DeepRetrievalResult,
    ExternalSource,
    QuickHit,
    RetrievalLimits,
    deep_retrieve,
    quick_search,
)
from litscout.orchestrator.sessions import (
    RunRecord,
    RunStatus,
    SearchSession,
    SessionStatus,
)
from litscout.orchestrator.store import SessionStore
from litscout.validator import ScoringConfig, validate_candidates

EventCallback = Callable[[str, dict], None]


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Orchestrator:
    """Session lifecycle management over a store, a backend, and an index."""

    def __init__(
        self,
        store: SessionStore,
        backend: Backend,
        index: CorpusIndex | None = None,
        *,
        limits: RetrievalLimits | None = None,
        scoring: ScoringConfig | None = None,
        sources: Sequence[ExternalSource] | None = None,
        clock: Callable[[], datetime] = _utc_now,
        id_factory: Callable[[], str] | None = None,
    ):
        self.store = store
        self.backend = backend
        self.index = index
        self.limits = limits or RetrievalLimits()
        self.scoring = scoring or ScoringConfig()
        self.sources = list(sources) if sources else []
        self.clock = clock
        self.id_factory = id_factory or (lambda: secrets.token_hex(8))
        self._guard = threading.Lock()
        self._cache: dict[str, SearchSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._active: set[str] = set()

    # -- internals ---------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def _remember(self, session: SearchSession) -> None:
        with self._guard:
            self._cache[session.session_id] = session

    def _append(self, session_id: str, event: dict[str, Any]) -> None:
        self.store.append_event(session_id, event)

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, query: ResearchQuery) -> SearchSession:
        """Plan a new session; planning failure yields a failed session."""
        session_id = self.id_factory()
        now = self.clock()
        try:
            plan = generate_plan(query, self.backend)
        except LitScoutError as exc:
            session = SearchSession(
                session_id=session_id,
                query=query,
                status=SessionStatus.FAILED,
                created_at=now,
                updated_at=now,
                error=str(exc),
            )
            self._append(
                session_id,
                {
                    "event": "created",
                    "ts": now.isoformat(),
                    "session_id": session_id,
                    "status": SessionStatus.FAILED.value,
                    "query": to_jsonable(query),
                    "error": str(exc),
                },
            )
            self._remember(session)
            return session
        session = SearchSession(
            session_id=session_id,
            query=query,
            status=SessionStatus.READY,
            created_at=now,
            updated_at=now,
            plans=(plan,),
        )
        self._append(
            session_id,
            {
                "event": "created",
                "ts": now.isoformat(),
                "session_id": session_id,
                "status": SessionStatus.READY.value,
                "query": to_jsonable(query),
            },
        )
        self._append(
            session_id,
            {"event": "plan-added", "ts": now.isoformat(), "plan": to_jsonable(plan)},
        )
        self._remember(session)
        return session

    def get_session(self, session_id: str) -> SearchSession:
        with self._guard:
            cached = self._cache.get(session_id)
        if cached is not None:
            return cached
        session = self.store.load(session_id)
        self._remember(session)
        return session

    def session_ids(self) -> list[str]:
        with self._guard:
            cached = set(self._cache)
        return sorted(cached | set(self.store.session_ids()))

    def edit_criteria(self, session_id: str, edits: Sequence[EditCommand]) -> SearchSession:
        """Apply plan edits; rejected while a run is active."""
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            if session.session_id in self._active or session.active_run() is not None:
                raise SessionConflictError(
                    f"session {session_id} has an active run; edits are not allowed"
                )
            if session.status is not SessionStatus.READY or not session.plans:
                raise SessionConflictError(f"session {session_id} has no plan to edit")
            plan = apply_edits(session.latest_plan, edits)
            now = self.clock()
            self._append(
                session_id,
                {"event": "plan-added", "ts": now.isoformat(), "plan": to_jsonable(plan)},
            )
            session = session.with_plan(plan, now)
            self._remember(session)
            return session

    # -- runs ----------------------------------------------------------------

    def start_run(self, session_id: str) -> SearchSession:
        """Record the start of a run of the latest plan."""
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            if session.session_id in self._active or session.active_run() is not None:
                raise SessionConflictError(f"session {session_id} already has an active run")
            if session.status is not SessionStatus.READY or not session.plans:
                raise SessionConflictError(f"session {session_id} is not ready to run")
            run_id = self.id_factory()
            now = self.clock()
            run = RunRecord(
                run_id=run_id,
                plan_version=session.latest_plan.version,
                status=RunStatus.RUNNING,
                started_at=now,
            )
            self._append(
                session_id,
                {
                    "event": "run-started",
                    "ts": now.isoformat(),
                    "run_id": run_id,
                    "plan_version": run.plan_version,
                },
            )
            session = session.with_run(run, now)
            self._remember(session)
            self._active.add(session_id)
            return session

    def execute_run(
        self,
        session_id: str,
        run_id: str,
        on_event: EventCallback | None = None,
    ) -> RunRecord:
        """Retrieve candidates, validate them, and finish the run.

        Emits ``verdict`` events in completion order and one terminal
        ``done`` event.  Failures mark the run failed instead of raising.
        """
        session = self.get_session(session_id)
        run = session.find_run(run_id)
        if run is None:
            raise SessionNotFoundError(run_id)
        if run.status is not RunStatus.RUNNING:
            raise SessionConflictError(f"run {run_id} has already finished")
        plan = next((p for p in session.plans if p.version == run.plan_version), None)
        if plan is None:
            raise SessionConflictError(f"run {run_id} references a missing plan version")

        emitted: list[PaperVerdict] = []
        papers_by_id: dict[str, PaperMetadata] = {}

        def emit(kind: str, payload: dict) -> None:
            if on_event is not None:
                on_event(kind, payload)

        def record_verdict(verdict: PaperVerdict) -> None:
            now = self.clock()
            self._append(
                session_id,
                {
                    "event": "verdict-appended",
                    "ts": now.isoformat(),
                    "run_id": run_id,
                    "verdict": to_jsonable(verdict),
                },
            )
            emitted.append(verdict)
            with self._lock_for(session_id):
                current = self.get_session(session_id)
                active = current.find_run(run_id)
                if active is not None and active.status is RunStatus.RUNNING:
                    updated = RunRecord(
                        run_id=run_id,
                        plan_version=active.plan_version,
                        status=RunStatus.RUNNING,
                        started_at=active.started_at,
                        verdicts=active.verdicts + (verdict,),
                    )
                    self._remember(current.with_updated_run(updated, now))
            paper = papers_by_id.get(verdict.paper_id)
            emit(
                "verdict",
                {
                    "run_id": run_id,
                    "verdict": to_jsonable(verdict),
                    "paper": to_jsonable(paper) if paper is not None else None,
                },
            )

        status = RunStatus.DONE
        error: str | None = None
        degraded = False
        final: list[PaperVerdict] = []
        try:
            if self.index is None:
                raise BackendConfigError("no corpus index is configured for retrieval")
            retrieval: DeepRetrievalResult = deep_retrieve(
                self.index, plan, self.limits, self.sources or None
            )
            degraded = retrieval.degraded
            candidates: list[PaperMetadata] = []
            for paper in retrieval.papers:
                if paper.paper_id not in papers_by_id:
                    papers_by_id[paper.paper_id] = paper
                    candidates.append(paper)
            final = validate_candidates(
                session.query,
                plan,
                candidates,
                self.backend,
                self.scoring,
                on_verdict=record_verdict,
            )
        except LitScoutError as exc:
            status = RunStatus.FAILED
            error = str(exc)
            final = list(emitted)

        now = self.clock()
        finish_event: dict[str, Any] = {
            "event": "run-finished",
            "ts": now.isoformat(),
            "run_id": run_id,
            "status": status.value,
            "order": [v.paper_id for v in final],
            "degraded": degraded,
        }
        if error is not None:
            finish_event["error"] = error
        self._append(session_id, finish_event)

        finished = RunRecord(
            run_id=run_id,
            plan_version=run.plan_version,
            status=status,
            started_at=run.started_at,
            verdicts=tuple(final),
            finished_at=now,
            degraded=degraded,
            error=error,
        )
        with self._lock_for(session_id):
            current = self.get_session(session_id)
            self._remember(current.with_updated_run(finished, now))
            with self._guard:
                self._active.discard(session_id)
        emit(
            "done",
            {
                "run_id": run_id,
                "status": status.value,
                "order": [v.paper_id for v in final],
                "degraded": degraded,
                "error": error,
            },
        )
        return finished

    def run_search(self, session_id: str, on_event: EventCallback | None = None) -> RunRecord:
        """Start and execute a run synchronously."""
        session = self.start_run(session_id)
        run = session.runs[-1]
        return self.execute_run(session_id, run.run_id, on_event)

    # -- lookups ---------------------------------------------------------

    def quick(self, query_text: str, top_k: int = 10) -> list[QuickHit]:
        if self.index is None:
            raise BackendConfigError("no corpus index is configured for retrieval")
        return quick_search(self.index, query_text, top_k)

    def find_paper(self, paper_id: str) -> PaperMetadata | None:
        if self.index is None:
            return None
        return self.index.find_paper(paper_id)
