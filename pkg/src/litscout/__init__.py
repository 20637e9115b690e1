"""Agent-powered literature deep search.

The package is organised around a small pipeline: a planner turns a free-text
research question into Boolean search queries plus weighted screening
criteria, a retrieval layer executes those queries against a local corpus
index (and optional external sources), and a validator scores every candidate
paper against the criteria through a model backend.  Evaluation utilities,
a session orchestrator with an HTTP service, and a command line front end
sit on top.
"""

from litscout.errors import (
    BackendConfigError,
    EditError,
    ExtractionError,
    IngestError,
    InvariantError,
    LitScoutError,
    MetricError,
    QueryParseError,
    RateLimitExceeded,
    SchemaValidationError,
    SessionConflictError,
    SessionLogError,
    SessionNotFoundError,
    SourceError,
    StructuredOutputError,
    TransportError,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfigError",
    "EditError",
    "ExtractionError",
    "IngestError",
    "InvariantError",
    "LitScoutError",
    "MetricError",
    "QueryParseError",
    "RateLimitExceeded",
    "SchemaValidationError",
    "SessionConflictError",
    "SessionLogError",
    "SessionNotFoundError",
    "SourceError",
    "StructuredOutputError",
    "TransportError",
    "__version__",
]
