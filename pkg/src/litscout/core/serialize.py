"""Canonical JSON serialization for the core value types.

Canonical form: UTF-8, keys sorted, compact separators, fields that are
None omitted, datetimes as ISO-8601 with an explicit UTC offset, and
search queries rendered as canonical Boolean query strings.  Two equal
values always serialize to identical bytes, and parsing a serialized
value reproduces it exactly.
"""

from __future__ import annotations

import json
from datetime import date, datetime
from typing import Any, Callable, Type, TypeVar

from litscout.core.types import (
    AssessmentVerdict,
    CriteriaSet,
    Criterion,
    CriterionAssessment,
    CriterionKind,
    EvidenceSpan,
    PaperClassification,
    PaperMetadata,
    PaperVerdict,
    QueryPlan,
    ResearchQuery,
)
from litscout.errors import InvariantError

T = TypeVar("T")


def _iso_instant(value: datetime) -> str:
    return value.isoformat()


def parse_instant(value: str) -> datetime:
    """Parse an ISO-8601 timestamp, accepting a trailing ``Z`` for UTC."""
    if not isinstance(value, str):
        raise InvariantError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise InvariantError(f"invalid ISO-8601 timestamp: {value!r}") from None
    if parsed.tzinfo is None:
        raise InvariantError(f"timestamp must carry a UTC offset: {value!r}")
    return parsed


def parse_date(value: str) -> date:
    if not isinstance(value, str):
        raise InvariantError(f"date must be a string, got {type(value).__name__}")
    try:
        return date.fromisoformat(value.strip())
    except ValueError:
        raise InvariantError(f"invalid ISO-8601 date: {value!r}") from None


def _prune(mapping: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in mapping.items() if v is not None}


def _research_query_to(value: ResearchQuery) -> dict[str, Any]:
    return _prune(
        {
            "text": value.text,
            "timestamp": _iso_instant(value.timestamp),
            "language_hint": value.language_hint,
        }
    )


def _research_query_from(data: dict[str, Any]) -> ResearchQuery:
    return ResearchQuery(
        text=data["text"],
        timestamp=parse_instant(data["timestamp"]),
        language_hint=data.get("language_hint"),
    )


def _criterion_to(value: Criterion) -> dict[str, Any]:
    return {
        "id": value.id,
        "kind": value.kind.value,
        "name": value.name,
        "description": value.description,
        "weight": value.weight,
    }


def _criterion_from(data: dict[str, Any]) -> Criterion:
    return Criterion(
        id=data["id"],
        kind=CriterionKind(data["kind"]),
        name=data["name"],
        description=data["description"],
        weight=data["weight"],
    )


def _criteria_set_to(value: CriteriaSet) -> dict[str, Any]:
    return {"criteria": [_criterion_to(c) for c in value.criteria]}


def _criteria_set_from(data: dict[str, Any]) -> CriteriaSet:
    return CriteriaSet(criteria=tuple(_criterion_from(c) for c in data["criteria"]))


def _query_plan_to(value: QueryPlan) -> dict[str, Any]:
    from litscout.boolquery import render_query

    return {
        "search_queries": [render_query(q, dialect="canonical") for q in value.search_queries],
        "criteria": _criteria_set_to(value.criteria),
        "source_query": _research_query_to(value.source_query),
        "version": value.version,
    }


def _query_plan_from(data: dict[str, Any]) -> QueryPlan:
    from litscout.boolquery import parse_boolean_query

    return QueryPlan(
        search_queries=tuple(parse_boolean_query(q) for q in data["search_queries"]),
        criteria=_criteria_set_from(data["criteria"]),
        source_query=_research_query_from(data["source_query"]),
        version=data["version"],
    )


def _paper_to(value: PaperMetadata) -> dict[str, Any]:
    return _prune(
        {
            "paper_id": value.paper_id,
            "title": value.title,
            "authors": list(value.authors),
            "affiliations": list(value.affiliations),
            "venue": value.venue,
            "venue_type": value.venue_type,
            "research_fields": list(value.research_fields),
            "doi": value.doi,
            "publication_date": value.publication_date.isoformat() if value.publication_date else None,
            "abstract": value.abstract,
            "citation_count": value.citation_count,
            "source_url": value.source_url,
        }
    )


def _paper_from(data: dict[str, Any]) -> PaperMetadata:
    pub = data.get("publication_date")
    return PaperMetadata(
        paper_id=data["paper_id"],
        title=data["title"],
        authors=tuple(data.get("authors", ())),
        affiliations=tuple(data.get("affiliations", ())),
        venue=data.get("venue", ""),
        venue_type=data.get("venue_type", "other"),
        research_fields=tuple(data.get("research_fields", ())),
        doi=data.get("doi"),
        publication_date=parse_date(pub) if pub is not None else None,
        abstract=data.get("abstract", ""),
        citation_count=data.get("citation_count"),
        source_url=data.get("source_url"),
    )


def _evidence_to(value: EvidenceSpan) -> dict[str, Any]:
    return {"source": value.source, "text": value.text, "verified": value.verified}


def _evidence_from(data: dict[str, Any]) -> EvidenceSpan:
    return EvidenceSpan(
        source=data["source"],
        text=data["text"],
        verified=data.get("verified", False),
    )


def _assessment_to(value: CriterionAssessment) -> dict[str, Any]:
    return {
        "criterion_id": value.criterion_id,
        "verdict": value.verdict.value,
        "explanation": value.explanation,
        "evidence": [_evidence_to(e) for e in value.evidence],
        "low_confidence": value.low_confidence,
    }


def _assessment_from(data: dict[str, Any]) -> CriterionAssessment:
    return CriterionAssessment(
        criterion_id=data["criterion_id"],
        verdict=AssessmentVerdict(data["verdict"]),
        explanation=data["explanation"],
        evidence=tuple(_evidence_from(e) for e in data.get("evidence", ())),
        low_confidence=data.get("low_confidence", False),
    )


def _verdict_to(value: PaperVerdict) -> dict[str, Any]:
    return {
        "paper_id": value.paper_id,
        "classification": value.classification.value,
        "score": value.score,
        "assessments": [_assessment_to(a) for a in value.assessments],
        "summary": value.summary,
        "error": value.error,
    }


def _verdict_from(data: dict[str, Any]) -> PaperVerdict:
    return PaperVerdict(
        paper_id=data["paper_id"],
        classification=PaperClassification(data["classification"]),
        score=data["score"],
        assessments=tuple(_assessment_from(a) for a in data["assessments"]),
        summary=data["summary"],
        error=data.get("error", False),
    )


_CODECS: dict[type, tuple[Callable[[Any], dict], Callable[[dict], Any]]] = {
    ResearchQuery: (_research_query_to, _research_query_from),
    Criterion: (_criterion_to, _criterion_from),
    CriteriaSet: (_criteria_set_to, _criteria_set_from),
    QueryPlan: (_query_plan_to, _query_plan_from),
    PaperMetadata: (_paper_to, _paper_from),
    EvidenceSpan: (_evidence_to, _evidence_from),
    CriterionAssessment: (_assessment_to, _assessment_from),
    PaperVerdict: (_verdict_to, _verdict_from),
}


def to_jsonable(value: Any) -> dict[str, Any]:
    """Convert a core value to a plain dict ready for JSON encoding."""
    codec = _CODECS.get(type(value))
    if codec is None:
        raise TypeError(f"no canonical serialization for {type(value).__name__}")
    return codec[0](value)


def from_jsonable(cls: Type[T], data: dict[str, Any]) -> T:
    """Rebuild a core value from its JSON-ready dict form."""
    codec = _CODECS.get(cls)
    if codec is None:
        raise TypeError(f"no canonical serialization for {cls.__name__}")
    if not isinstance(data, dict):
        raise InvariantError(f"expected a JSON object for {cls.__name__}")
    try:
        return codec[1](data)
    except KeyError as exc:
        raise InvariantError(f"missing field {exc.args[0]!r} for {cls.__name__}") from None


def canonical_json(data: Any) -> str:
    """Encode an already-jsonable structure in canonical form."""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def canonical_serialize(value: Any) -> str:
    """Serialize a core value to its canonical JSON text."""
    return canonical_json(to_jsonable(value))


def canonical_parse(cls: Type[T], text: str | bytes) -> T:
    """Parse canonical JSON text back into a core value."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvariantError(f"invalid JSON: {exc}") from None
    return from_jsonable(cls, data)
