"""HTTP service exposing sessions, runs, live verdict streams, and search.

Run events stream as server-sent events: one ``verdict`` event per
assessed paper followed by a terminal ``done`` event.  Subscribers that
join mid-run first replay everything already emitted; subscribers of a
finished run get the stored verdicts in final order.
"""

from __future__ import annotations

import os
import threading
from typing import Any, Iterator

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from litscout import __version__
from litscout.core.serialize import canonical_json, parse_instant, to_jsonable
from litscout.core.types import ResearchQuery
from litscout.errors import (
    EditError,
    InvariantError,
    LitScoutError,
    QueryParseError,
    SchemaValidationError,
    SessionConflictError,
    SessionLogError,
    SessionNotFoundError,
)
from litscout.orchestrator.engine import Orchestrator
from litscout.orchestrator.sessions import RunStatus, SearchSession, session_to_jsonable, run_to_jsonable
from litscout.planner import edit_from_dict


class _RunChannel:
    """Event buffer for one run with replay for late subscribers."""

    def __init__(self):
        self.events: list[tuple[str, dict]] = []
        self.done = False
        self.condition = threading.Condition()

    def publish(self, kind: str, payload: dict) -> None:
        with self.condition:
            self.events.append((kind, payload))
            if kind == "done":
                self.done = True
            self.condition.notify_all()

    def stream(self, poll_seconds: float = 0.2) -> Iterator[tuple[str, dict]]:
        index = 0
        while True:
            with self.condition:
                while index >= len(self.events) and not self.done:
                    self.condition.wait(timeout=poll_seconds)
                batch = self.events[index:]
                index = len(self.events)
                finished = self.done and index >= len(self.events)
            yield from batch
            if finished:
                return


class RunEventHub:
    """Registry of live run channels."""

    def __init__(self):
        self._channels: dict[str, _RunChannel] = {}
        self._guard = threading.Lock()

    def channel(self, run_id: str) -> _RunChannel:
        with self._guard:
            if run_id not in self._channels:
                self._channels[run_id] = _RunChannel()
            return self._channels[run_id]

    def existing(self, run_id: str) -> _RunChannel | None:
        with self._guard:
            return self._channels.get(run_id)


class CreateSessionBody(BaseModel):
    text: str = Field(min_length=1)
    timestamp: str | None = None
    language_hint: str | None = None


class EditCriteriaBody(BaseModel):
    edits: list[dict] = Field(min_length=1)


def _error_response(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": {"code": code, "message": message}})


def _sse_format(kind: str, payload: dict) -> str:
    return f"event: {kind}\ndata: {canonical_json(payload)}\n\n"


def create_app(orchestrator: Orchestrator) -> FastAPI:
    app = FastAPI(title="litscout", version=__version__)
    hub = RunEventHub()

    @app.exception_handler(SessionNotFoundError)
    async def _not_found(_request: Request, exc: SessionNotFoundError):
        missing = exc.args[0] if exc.args else "resource"
        return _error_response(404, "not_found", f"unknown id: {missing}")

    @app.exception_handler(SessionConflictError)
    async def _conflict(_request: Request, exc: SessionConflictError):
        return _error_response(409, "conflict", str(exc))

    @app.exception_handler(EditError)
    async def _edit_error(_request: Request, exc: EditError):
        return _error_response(422, "invalid_edit", str(exc))

    @app.exception_handler(QueryParseError)
    async def _parse_error(_request: Request, exc: QueryParseError):
        return _error_response(422, "invalid_query", str(exc))

    @app.exception_handler(InvariantError)
    async def _invariant_error(_request: Request, exc: InvariantError):
        return _error_response(422, "invalid_value", str(exc))

    @app.exception_handler(SchemaValidationError)
    async def _schema_error(_request: Request, exc: SchemaValidationError):
        return _error_response(422, "invalid_structure", str(exc))

    @app.exception_handler(SessionLogError)
    async def _log_error(_request: Request, exc: SessionLogError):
        return _error_response(500, "corrupt_log", str(exc))

    @app.exception_handler(LitScoutError)
    async def _other_error(_request: Request, exc: LitScoutError):
        return _error_response(400, "request_failed", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _body_error(_request: Request, exc: RequestValidationError):
        return _error_response(422, "invalid_request", str(exc.errors()))

    def _session_view(session: SearchSession) -> dict:
        return session_to_jsonable(session)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        timestamp = (
            parse_instant(body.timestamp) if body.timestamp is not None else orchestrator.clock()
        )
        query = ResearchQuery(
            text=body.text, timestamp=timestamp, language_hint=body.language_hint
        )
        return _session_view(orchestrator.create_session(query))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_view(orchestrator.get_session(session_id))

    @app.patch("/sessions/{session_id}/criteria")
    def edit_criteria(session_id: str, body: EditCriteriaBody) -> dict:
        edits = [edit_from_dict(raw) for raw in body.edits]
        return _session_view(orchestrator.edit_criteria(session_id, edits))

    @app.post("/sessions/{session_id}/runs", status_code=202)
    def start_run(session_id: str) -> dict:
        session = orchestrator.start_run(session_id)
        run = session.runs[-1]
        channel = hub.channel(run.run_id)
        worker = threading.Thread(
            target=orchestrator.execute_run,
            args=(session_id, run.run_id, channel.publish),
            name=f"run-{run.run_id}",
            daemon=True,
        )
        worker.start()
        return {
            "session_id": session_id,
            "run_id": run.run_id,
            "plan_version": run.plan_version,
            "status": run.status.value,
        }

    def _run_or_404(session_id: str, run_id: str):
        session = orchestrator.get_session(session_id)
        run = session.find_run(run_id)
        if run is None:
            raise SessionNotFoundError(run_id)
        return run

    @app.get("/sessions/{session_id}/runs/{run_id}")
    def get_run(session_id: str, run_id: str) -> dict:
        return run_to_jsonable(_run_or_404(session_id, run_id))

    @app.get("/sessions/{session_id}/runs/{run_id}/events")
    def run_events(session_id: str, run_id: str) -> StreamingResponse:
        run = _run_or_404(session_id, run_id)
        channel = hub.existing(run_id)
        if channel is None:
            if run.status is RunStatus.RUNNING:
                channel = hub.channel(run_id)
            else:
                channel = _RunChannel()
                for verdict in run.verdicts:
                    paper = orchestrator.find_paper(verdict.paper_id)
                    channel.publish(
                        "verdict",
                        {
                            "run_id": run_id,
                            "verdict": to_jsonable(verdict),
                            "paper": to_jsonable(paper) if paper is not None else None,
                        },
                    )
                channel.publish(
                    "done",
                    {
                        "run_id": run_id,
                        "status": run.status.value,
                        "order": [v.paper_id for v in run.verdicts],
                        "degraded": run.degraded,
                        "error": run.error,
                    },
                )

        def body() -> Iterator[str]:
            for kind, payload in channel.stream():
                yield _sse_format(kind, payload)

        return StreamingResponse(
            body(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get("/search/quick")
    def quick(q: str = Query(min_length=1), k: int = Query(default=10, ge=1, le=100)) -> dict:
        hits = orchestrator.quick(q, k)
        return {
            "query": q,
            "results": [
                {"paper": to_jsonable(hit.paper), "score": hit.score} for hit in hits
            ],
        }

    @app.get("/papers/{paper_id}")
    def get_paper(paper_id: str) -> dict:
        paper = orchestrator.find_paper(paper_id)
        if paper is None:
            raise SessionNotFoundError(paper_id)
        return to_jsonable(paper)

    return app


def app_from_env() -> FastAPI:
    """Build the service from environment configuration.

    Reads LITSCOUT_CORPUS, LITSCOUT_STORE_DIR, LITSCOUT_BACKEND_URL,
    LITSCOUT_MOCK_SCRIPT, LITSCOUT_MODEL, and LITSCOUT_API_KEY.
    """
    from litscout.llmgate import BackendConfig, create_backend
    from litscout.orchestrator.store import SessionStore
    from litscout.retrieval import ingest_corpus

    store = SessionStore(os.environ.get("LITSCOUT_STORE_DIR", "litscout_store"))
    model_name = os.environ.get("LITSCOUT_MODEL", "default")
    mock_script = os.environ.get("LITSCOUT_MOCK_SCRIPT")
    backend_url = os.environ.get("LITSCOUT_BACKEND_URL")
    if mock_script:
        config = BackendConfig(kind="mock", model_name=model_name, endpoint=mock_script)
        backend = create_backend(config)
    elif backend_url:
        config = BackendConfig(kind="remote", model_name=model_name, endpoint=backend_url)
        backend = create_backend(config, api_key=os.environ.get("LITSCOUT_API_KEY"))
    else:
        raise SystemExit("set LITSCOUT_BACKEND_URL or LITSCOUT_MOCK_SCRIPT to start the service")
    corpus = os.environ.get("LITSCOUT_CORPUS")
    index = ingest_corpus(corpus)[0] if corpus else None
    return create_app(Orchestrator(store, backend, index))
