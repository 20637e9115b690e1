"""Exception hierarchy shared across the package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from litscout.orchestrator.sessions import SearchSession


class LitScoutError(Exception):
    """Base class for every error raised by this package."""


class InvariantError(LitScoutError, ValueError):
    """A value object was constructed with data that violates its invariants."""


class QueryParseError(LitScoutError, ValueError):
    """A Boolean query string could not be parsed.

    ``offset`` is the byte offset (UTF-8) of the offending character in the
    original query string.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class TransportError(LitScoutError):
    """A backend request kept failing after the configured number of attempts."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class BackendConfigError(LitScoutError):
    """A backend is misconfigured or a scripted response is missing."""


class ExtractionError(LitScoutError):
    """No balanced JSON object could be extracted from a model response."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class SchemaValidationError(LitScoutError, ValueError):
    """A structured model response violates its expected shape.

    ``violations`` lists every violated constraint, not only the first one.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations) if violations else "invalid structure")
        self.violations = list(violations)


class PlanValidationError(SchemaValidationError):
    """A generated plan violates the query/criteria constraints."""


class AssessmentParseError(SchemaValidationError):
    """A validation response does not form a usable set of assessments."""


class StructuredOutputError(LitScoutError):
    """All structured-output attempts failed schema validation.

    ``attempt_violations`` holds one violation list per attempt, in order.
    """

    def __init__(self, attempt_violations: list[list[str]]):
        lines = [
            f"attempt {i + 1}: {'; '.join(v) if v else 'invalid'}"
            for i, v in enumerate(attempt_violations)
        ]
        super().__init__(
            f"no schema-valid response after {len(attempt_violations)} attempts: "
            + " | ".join(lines)
        )
        self.attempt_violations = [list(v) for v in attempt_violations]


class EditError(LitScoutError, ValueError):
    """A plan edit references a missing target or would break plan invariants."""


class IngestError(LitScoutError):
    """A corpus file yielded no usable documents."""


class SourceError(LitScoutError):
    """An external paper source failed or returned an unusable response."""

    def __init__(self, source: str, message: str):
        super().__init__(f"source {source!r}: {message}")
        self.source = source


class RateLimitExceeded(SourceError):
    """The client-side rate limit for an external source was exhausted."""

    def __init__(self, source: str, retry_after: float):
        super().__init__(source, f"rate limit exceeded, retry in {retry_after:.2f}s")
        self.retry_after = retry_after


class MetricError(LitScoutError, ValueError):
    """A metric was called with inputs it is undefined for."""


class SessionNotFoundError(LitScoutError, KeyError):
    """No session (or run) with the requested id exists."""


class SessionConflictError(LitScoutError):
    """The requested session operation conflicts with an active run."""


class SessionLogError(LitScoutError):
    """A persisted session event log is corrupt.

    ``line_number`` is the 1-based line of the first bad event and
    ``partial`` the session state recovered from the preceding lines,
    when at least the creation event was intact.
    """

    def __init__(
        self,
        message: str,
        line_number: int,
        partial: "SearchSession | None" = None,
    ):
        super().__init__(f"{message} (line {line_number})")
        self.line_number = line_number
        self.partial = partial
