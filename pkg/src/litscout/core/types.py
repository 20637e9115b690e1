"""Value types shared by the planner, retrieval, and validation layers.

Every type here is immutable after construction and validates its own
invariants, so downstream code never re-checks shapes it receives.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum
from typing import TYPE_CHECKING, Iterable

from litscout.errors import InvariantError

if TYPE_CHECKING:
    from litscout.boolquery import BooleanQueryAst

# Criterion weights must sum to one within this absolute tolerance.
WEIGHT_SUM_TOLERANCE = 1e-6

VENUE_TYPES = ("journal", "conference", "workshop", "preprint", "other")


class CriterionKind(str, Enum):
    TASK = "task"
    METHOD = "method"
    DATASET = "dataset"
    METRIC = "metric"
    OTHER = "other"


class AssessmentVerdict(str, Enum):
    """Per-criterion judgement produced by the validator."""

    SUPPORT = "support"
    SOMEWHAT_SUPPORT = "somewhat_support"
    REJECT = "reject"
    INSUFFICIENT_INFORMATION = "insufficient_information"

    @classmethod
    def parse(cls, value: str) -> "AssessmentVerdict":
        try:
            return cls(value)
        except ValueError:
            legal = ", ".join(v.value for v in cls)
            raise InvariantError(
                f"unknown verdict {value!r}; expected one of: {legal}"
            ) from None


class PaperClassification(str, Enum):
    PERFECT = "Perfect"
    PARTIAL = "Partial"
    NO = "No"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantError(message)


def _as_str_tuple(values: Iterable[str], label: str) -> tuple[str, ...]:
    out = tuple(values)
    for v in out:
        _require(isinstance(v, str), f"{label} entries must be strings")
    return out


@dataclass(frozen=True)
class ResearchQuery:
    """A user's research question, as received.

    ``timestamp`` must be timezone-aware so that serialized queries denote
    one instant regardless of where they are re-read.
    """

    text: str
    timestamp: datetime
    language_hint: str | None = None

    def __post_init__(self):
        _require(isinstance(self.text, str) and self.text.strip() != "", "query text must be non-empty")
        _require(isinstance(self.timestamp, datetime), "timestamp must be a datetime")
        _require(self.timestamp.tzinfo is not None, "timestamp must be timezone-aware")
        if self.language_hint is not None:
            _require(
                isinstance(self.language_hint, str) and self.language_hint.strip() != "",
                "language_hint must be None or a non-empty string",
            )


@dataclass(frozen=True)
class Criterion:
    """A standalone screening rule a paper is judged against."""

    id: str
    kind: CriterionKind
    name: str
    description: str
    weight: float

    def __post_init__(self):
        _require(isinstance(self.id, str) and self.id != "", "criterion id must be non-empty")
        _require(isinstance(self.kind, CriterionKind), "kind must be a CriterionKind")
        _require(isinstance(self.name, str) and self.name.strip() != "", "criterion name must be non-empty")
        _require(
            isinstance(self.description, str) and self.description.strip() != "",
            "criterion description must be non-empty",
        )
        _require(
            isinstance(self.weight, (int, float)) and not isinstance(self.weight, bool),
            "weight must be a number",
        )
        w = float(self.weight)
        _require(math.isfinite(w) and 0.0 < w <= 1.0, "weight must lie in (0, 1]")
        object.__setattr__(self, "weight", w)


@dataclass(frozen=True)
class CriteriaSet:
    """Between one and four criteria whose weights sum to one."""

    criteria: tuple[Criterion, ...]

    def __post_init__(self):
        crit = tuple(self.criteria)
        object.__setattr__(self, "criteria", crit)
        _require(1 <= len(crit) <= 4, f"expected 1-4 criteria, got {len(crit)}")
        for c in crit:
            _require(isinstance(c, Criterion), "criteria entries must be Criterion values")
        ids = [c.id for c in crit]
        _require(len(set(ids)) == len(ids), "criterion ids must be unique")
        total = sum(c.weight for c in crit)
        _require(
            abs(total - 1.0) <= WEIGHT_SUM_TOLERANCE,
            f"criterion weights must sum to 1 (got {total!r})",
        )

    def __iter__(self):
        return iter(self.criteria)

    def __len__(self) -> int:
        return len(self.criteria)

    def by_id(self, criterion_id: str) -> Criterion:
        for c in self.criteria:
            if c.id == criterion_id:
                return c
        raise KeyError(criterion_id)


@dataclass(frozen=True)
class QueryPlan:
    """Search queries plus screening criteria derived from one research query."""

    search_queries: tuple["BooleanQueryAst", ...]
    criteria: CriteriaSet
    source_query: ResearchQuery
    version: int = 1

    def __post_init__(self):
        from litscout.boolquery import BooleanQueryAst  # deferred: avoids import cycle

        queries = tuple(self.search_queries)
        object.__setattr__(self, "search_queries", queries)
        _require(2 <= len(queries) <= 4, f"expected 2-4 search queries, got {len(queries)}")
        for q in queries:
            _require(isinstance(q, BooleanQueryAst), "search queries must be parsed query ASTs")
        _require(isinstance(self.criteria, CriteriaSet), "criteria must be a CriteriaSet")
        _require(isinstance(self.source_query, ResearchQuery), "source_query must be a ResearchQuery")
        _require(
            isinstance(self.version, int) and not isinstance(self.version, bool) and self.version >= 1,
            "version must be an integer >= 1",
        )


@dataclass(frozen=True)
class PaperMetadata:
    """Bibliographic record for one candidate paper."""

    paper_id: str
    title: str
    authors: tuple[str, ...] = ()
    affiliations: tuple[str, ...] = ()
    venue: str = ""
    venue_type: str = "other"
    research_fields: tuple[str, ...] = ()
    doi: str | None = None
    publication_date: date | None = None
    abstract: str = ""
    citation_count: int | None = None
    source_url: str | None = None

    def __post_init__(self):
        _require(isinstance(self.paper_id, str) and self.paper_id != "", "paper_id must be non-empty")
        _require(isinstance(self.title, str) and self.title.strip() != "", "title must be non-empty")
        object.__setattr__(self, "authors", _as_str_tuple(self.authors, "authors"))
        object.__setattr__(self, "affiliations", _as_str_tuple(self.affiliations, "affiliations"))
        object.__setattr__(self, "research_fields", _as_str_tuple(self.research_fields, "research_fields"))
        _require(isinstance(self.venue, str), "venue must be a string")
        _require(self.venue_type in VENUE_TYPES, f"venue_type must be one of {VENUE_TYPES}")
        _require(isinstance(self.abstract, str), "abstract must be a string")
        if self.doi is not None:
            _require(isinstance(self.doi, str) and self.doi.strip() != "", "doi must be None or non-empty")
        if self.publication_date is not None:
            _require(
                isinstance(self.publication_date, date) and not isinstance(self.publication_date, datetime),
                "publication_date must be a date",
            )
        if self.citation_count is not None:
            _require(
                isinstance(self.citation_count, int)
                and not isinstance(self.citation_count, bool)
                and self.citation_count >= 0,
                "citation_count must be a non-negative integer",
            )
        if self.source_url is not None:
            _require(
                isinstance(self.source_url, str) and self.source_url.strip() != "",
                "source_url must be None or non-empty",
            )

    def field_completeness(self) -> int:
        """Number of populated metadata fields, used to pick the richer duplicate."""
        values = (
            self.title, self.authors, self.affiliations, self.venue,
            self.research_fields, self.doi, self.publication_date,
            self.abstract, self.citation_count, self.source_url,
        )
        count = sum(1 for v in values if v not in (None, "", ()))
        if self.venue_type != "other":
            count += 1
        return count


@dataclass(frozen=True)
class EvidenceSpan:
    """A quoted snippet backing an assessment, tied to the field it came from."""

    source: str
    text: str
    verified: bool = False

    def __post_init__(self):
        _require(isinstance(self.source, str) and self.source.strip() != "", "evidence source must be non-empty")
        _require(isinstance(self.text, str) and self.text.strip() != "", "evidence text must be non-empty")
        _require(isinstance(self.verified, bool), "verified must be a bool")


@dataclass(frozen=True)
class CriterionAssessment:
    """One criterion's verdict for one paper."""

    criterion_id: str
    verdict: AssessmentVerdict
    explanation: str
    evidence: tuple[EvidenceSpan, ...] = ()
    low_confidence: bool = False

    def __post_init__(self):
        _require(isinstance(self.criterion_id, str) and self.criterion_id != "", "criterion_id must be non-empty")
        _require(isinstance(self.verdict, AssessmentVerdict), "verdict must be an AssessmentVerdict")
        _require(
            isinstance(self.explanation, str) and self.explanation.strip() != "",
            "explanation must be non-empty",
        )
        ev = tuple(self.evidence)
        for span in ev:
            _require(isinstance(span, EvidenceSpan), "evidence entries must be EvidenceSpan values")
        object.__setattr__(self, "evidence", ev)
        _require(isinstance(self.low_confidence, bool), "low_confidence must be a bool")


@dataclass(frozen=True)
class PaperVerdict:
    """Aggregated judgement of one paper against a criteria set."""

    paper_id: str
    classification: PaperClassification
    score: float
    assessments: tuple[CriterionAssessment, ...]
    summary: str
    error: bool = False

    def __post_init__(self):
        _require(isinstance(self.paper_id, str) and self.paper_id != "", "paper_id must be non-empty")
        _require(isinstance(self.classification, PaperClassification), "classification must be a PaperClassification")
        _require(
            isinstance(self.score, (int, float)) and not isinstance(self.score, bool),
            "score must be a number",
        )
        s = float(self.score)
        _require(0.0 <= s <= 1.0, f"score must lie in [0, 1], got {s!r}")
        object.__setattr__(self, "score", s)
        assessments = tuple(self.assessments)
        object.__setattr__(self, "assessments", assessments)
        _require(len(assessments) >= 1, "at least one assessment is required")
        ids = [a.criterion_id for a in assessments]
        _require(len(set(ids)) == len(ids), "one assessment per criterion: duplicate criterion_id")
        for a in assessments:
            _require(isinstance(a, CriterionAssessment), "assessments must be CriterionAssessment values")
        _require(isinstance(self.summary, str) and self.summary.strip() != "", "summary must be non-empty")
        _require(isinstance(self.error, bool), "error must be a bool")


def normalize_paper_key(paper: PaperMetadata) -> str:
    """Deduplication key for a paper.

    Prefers the DOI, lowercased; otherwise the title is NFKC-normalized,
    lowercased, and stripped of every non-alphanumeric character.
    """
    if paper.doi:
        return paper.doi.strip().lower()
    title = unicodedata.normalize("NFKC", paper.title).lower()
    return "".join(ch for ch in title if ch.isalnum())
