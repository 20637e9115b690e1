"""Search sessions: durable state, the run engine, and the HTTP service."""

from litscout.orchestrator.engine import Orchestrator
from litscout.orchestrator.sessions import (
    RunRecord,
    RunStatus,
    SearchSession,
    SessionStatus,
)
from litscout.orchestrator.store import SessionStore

__all__ = [
    "Orchestrator",
    "RunRecord",
    "RunStatus",
    "SearchSession",
    "SessionStatus",
    "SessionStore",
]
