"""Corpus indexing, BM25 ranking, Boolean retrieval, and external sources.

Quick search ranks by BM25 alone.  Deep retrieval executes every Boolean
query of a plan against the index, ranks each query's matches by BM25
over the query's plain rendering, merges in optional external sources,
and deduplicates while keeping the richest record per paper.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from litscout.boolquery import BooleanQueryAst, match_tokens, render_query
from litscout.core.types import VENUE_TYPES, PaperMetadata, QueryPlan, normalize_paper_key
from litscout.errors import IngestError, InvariantError, RateLimitExceeded, SourceError
from litscout.evalkit.metrics import tokenize

BM25_K1 = 1.2
BM25_B = 0.75


@dataclass(frozen=True)
class RetrievalLimits:
    max_candidates: int = 100
    per_query_cap: int = 50

    def __post_init__(self):
        if not (isinstance(self.max_candidates, int) and self.max_candidates >= 1):
            raise InvariantError("max_candidates must be a positive integer")
        if not (isinstance(self.per_query_cap, int) and self.per_query_cap >= 1):
            raise InvariantError("per_query_cap must be a positive integer")


def title_sort_key(paper: PaperMetadata) -> str:
    """Whitespace-normalized lowercase title, used for deterministic ties."""
    return " ".join(paper.title.lower().split())


def citation_sort_value(paper: PaperMetadata) -> int:
    """Citation count for ranking; unknown counts sort last."""
    return paper.citation_count if paper.citation_count is not None else -1


class CorpusIndex:
    """In-memory inverted index over title plus abstract tokens."""

    def __init__(self, papers: Sequence[PaperMetadata]):
        if not papers:
            raise IngestError("an index needs at least one document")
        self.documents: list[PaperMetadata] = list(papers)
        self.doc_tokens: list[list[str]] = []
        self.doc_token_sets: list[frozenset[str]] = []
        self.doc_lengths: list[int] = []
        self.inverted: dict[str, list[tuple[int, int]]] = {}
        for doc_id, paper in enumerate(self.documents):
            tokens = tokenize(f"{paper.title} {paper.abstract}")
            self.doc_tokens.append(tokens)
            self.doc_token_sets.append(frozenset(tokens))
            self.doc_lengths.append(len(tokens))
            for token, tf in Counter(tokens).items():
                self.inverted.setdefault(token, []).append((doc_id, tf))
        total = sum(self.doc_lengths)
        self.avg_doc_length: float = total / len(self.documents) if total else 0.0
        self.total_tokens: int = total

    def __len__(self) -> int:
        return len(self.documents)

    def find_paper(self, paper_id: str) -> PaperMetadata | None:
        for paper in self.documents:
            if paper.paper_id == paper_id:
                return paper
        return None


@dataclass(frozen=True)
class IngestStats:
    documents: int
    tokens: int
    rejected_lines: int
    rejected: tuple[tuple[int, str], ...] = ()


def _string_list(record: dict, key: str, aliases: tuple[str, ...] = ()) -> tuple[str, ...]:
    for k in (key, *aliases):
        if k in record:
            value = record[k]
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ValueError(f"{key} must be a list of strings")
            return tuple(value)
    return ()


def _optional_str(record: dict, key: str, aliases: tuple[str, ...] = ()) -> str | None:
    for k in (key, *aliases):
        if k in record and record[k] is not None:
            value = record[k]
            if not isinstance(value, str):
                raise ValueError(f"{key} must be a string")
            return value
    return None


def paper_from_record(record: Any, default_id: str) -> PaperMetadata:
    """Map one raw corpus or source record onto paper metadata.

    Raises ``ValueError`` with the reason for any malformed record.
    """
    if not isinstance(record, dict):
        raise ValueError("record must be a JSON object")
    title = record.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ValueError("title is missing or empty")
    paper_id = _optional_str(record, "paper_id", aliases=("id",)) or default_id
    if not paper_id.strip():
        raise ValueError("paper_id must be non-empty")
    venue_type = _optional_str(record, "venue_type") or "other"
    if venue_type not in VENUE_TYPES:
        venue_type = "other"
    pub = _optional_str(record, "publication_date", aliases=("date",))
    publication_date: date | None = None
    if pub:
        text = pub.strip()
        try:
            publication_date = (
                date(int(text), 1, 1) if len(text) == 4 and text.isdigit() else date.fromisoformat(text)
            )
        except ValueError:
            raise ValueError(f"publication_date is not an ISO date: {pub!r}") from None
    citations = record.get("citation_count", record.get("citations"))
    if citations is not None:
        if not isinstance(citations, int) or isinstance(citations, bool) or citations < 0:
            raise ValueError("citation_count must be a non-negative integer")
    abstract = record.get("abstract", "")
    if not isinstance(abstract, str):
        raise ValueError("abstract must be a string")
    venue = _optional_str(record, "venue", aliases=("journal",)) or ""
    return PaperMetadata(
        paper_id=paper_id,
        title=title,
        authors=_string_list(record, "authors"),
        affiliations=_string_list(record, "affiliations"),
        venue=venue,
        venue_type=venue_type,
        research_fields=_string_list(record, "research_fields", aliases=("fields",)),
        doi=_optional_str(record, "doi"),
        publication_date=publication_date,
        abstract=abstract,
        citation_count=citations,
        source_url=_optional_str(record, "source_url", aliases=("url",)),
    )


def ingest_corpus(path: str | Path) -> tuple[CorpusIndex, IngestStats]:
    """Load a JSONL corpus file and build its index.

    Malformed lines are skipped and reported with their 1-based line
    numbers; a file yielding zero valid documents is an error.
    """
    papers: list[PaperMetadata] = []
    rejected: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                rejected.append((line_no, f"invalid JSON: {exc.msg}"))
                continue
            try:
                papers.append(paper_from_record(record, default_id=f"doc-{line_no}"))
            except ValueError as exc:
                rejected.append((line_no, str(exc)))
    if not papers:
        raise IngestError(f"{path}: no valid documents ({len(rejected)} rejected lines)")
    index = CorpusIndex(papers)
    stats = IngestStats(
        documents=len(papers),
        tokens=index.total_tokens,
        rejected_lines=len(rejected),
        rejected=tuple(rejected),
    )
    return index, stats


def bm25_scores(index: CorpusIndex, query_tokens: Sequence[str]) -> dict[int, float]:
    """BM25 score per document for every document sharing a query token.

    Query tokens contribute with multiplicity.  The inverse document
    frequency is floored at zero, so a document can appear with score 0.0;
    presence in the result still means it shares at least one token.
    """
    n_docs = len(index.documents)
    scores: dict[int, float] = {}
    for token in query_tokens:
        postings = index.inverted.get(token)
        if not postings:
            continue
        df = len(postings)
        idf = max(0.0, math.log((n_docs - df + 0.5) / (df + 0.5)))
        for doc_id, tf in postings:
            norm = BM25_K1 * (1.0 - BM25_B + BM25_B * index.doc_lengths[doc_id] / index.avg_doc_length)
            gain = idf * (tf * (BM25_K1 + 1.0)) / (tf + norm)
            scores[doc_id] = scores.get(doc_id, 0.0) + gain
    return scores


@dataclass(frozen=True)
class QuickHit:
    paper: PaperMetadata
    score: float


def _rank_doc_ids(index: CorpusIndex, doc_ids: Iterable[int], scores: dict[int, float]) -> list[int]:
    return sorted(
        doc_ids,
        key=lambda i: (
            -scores.get(i, 0.0),
            -citation_sort_value(index.documents[i]),
            title_sort_key(index.documents[i]),
        ),
    )


def quick_search(index: CorpusIndex, query_text: str, top_k: int = 10) -> list[QuickHit]:
    """Keyword search: BM25 over the query's tokens.

    Only documents sharing at least one query token are returned, ranked
    by score with citation count and title as deterministic tie-breaks.
    """
    if not (isinstance(top_k, int) and top_k >= 1):
        raise InvariantError("top_k must be a positive integer")
    tokens = tokenize(query_text)
    if not tokens:
        return []
    scores = bm25_scores(index, tokens)
    ranked = _rank_doc_ids(index, scores.keys(), scores)
    return [QuickHit(paper=index.documents[i], score=scores[i]) for i in ranked[:top_k]]


# --- external sources ------------------------------------------------------


@dataclass(frozen=True)
class SourceDescriptor:
    name: str
    endpoint: str
    dialect: str = "plain"
    rate_per_minute: float = 60.0
    timeout: float = 10.0

    def __post_init__(self):
        if not self.name:
            raise InvariantError("source name must be non-empty")
        if self.dialect not in ("canonical", "plain"):
            raise InvariantError("dialect must be 'canonical' or 'plain'")
        if self.rate_per_minute <= 0:
            raise InvariantError("rate_per_minute must be positive")


class TokenBucket:
    """Client-side rate limiter: one token per request, steady refill."""

    def __init__(self, rate_per_minute: float, *, clock: Callable[[], float] = time.monotonic):
        self.rate = rate_per_minute / 60.0
        self.capacity = max(1.0, float(rate_per_minute))
        self.tokens = self.capacity
        self.clock = clock
        self.updated = clock()

    def try_acquire(self) -> float:
        """Take one token; returns 0.0, or the wait in seconds when empty."""
        now = self.clock()
        self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
        self.updated = now
        if self.tokens >= 1.0:
            self.tokens -= 1.0
            return 0.0
        return (1.0 - self.tokens) / self.rate


@dataclass(frozen=True)
class ExternalFetchResult:
    papers: tuple[PaperMetadata, ...]
    warnings: tuple[str, ...] = ()


def _requests_source_transport(endpoint: str, params: dict, timeout: float) -> Any:
    import requests

    response = requests.get(endpoint, params=params, timeout=timeout)
    response.raise_for_status()
    return response.json()


def fetch_external(
    query: BooleanQueryAst,
    source: SourceDescriptor,
    *,
    transport: Callable[[str, dict, float], Any] | None = None,
    bucket: TokenBucket | None = None,
    limit: int | None = None,
) -> ExternalFetchResult:
    """Query one external source, mapping its records onto paper metadata.

    The query is rendered in the source's dialect.  Records that cannot be
    mapped become warnings instead of failures; transport or shape
    problems raise :class:`SourceError`, and an exhausted rate limit
    raises :class:`RateLimitExceeded` without calling the source.
    """
    if bucket is not None:
        wait = bucket.try_acquire()
        if wait > 0.0:
            raise RateLimitExceeded(source.name, wait)
    send = transport or _requests_source_transport
    params: dict[str, Any] = {"q": render_query(query, dialect=source.dialect)}
    if limit is not None:
        params["limit"] = limit
    try:
        body = send(source.endpoint, params, source.timeout)
    except Exception as exc:
        raise SourceError(source.name, f"request failed: {exc}") from exc
    records = body.get("records") if isinstance(body, dict) else body
    if not isinstance(records, list):
        raise SourceError(source.name, "response does not contain a record list")
    papers: list[PaperMetadata] = []
    warnings: list[str] = []
    for idx, record in enumerate(records):
        try:
            papers.append(paper_from_record(record, default_id=f"{source.name}-{idx + 1}"))
        except ValueError as exc:
            warnings.append(f"{source.name} record {idx + 1}: {exc}")
    return ExternalFetchResult(papers=tuple(papers), warnings=tuple(warnings))


class ExternalSource:
    """A source descriptor bound to a transport and its own rate limiter."""

    def __init__(
        self,
        descriptor: SourceDescriptor,
        *,
        transport: Callable[[str, dict, float], Any] | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.descriptor = descriptor
        self.transport = transport
        self.bucket = TokenBucket(descriptor.rate_per_minute, clock=clock)

    @property
    def name(self) -> str:
        return self.descriptor.name

    def search(self, query: BooleanQueryAst, limit: int | None = None) -> ExternalFetchResult:
        return fetch_external(
            query, self.descriptor, transport=self.transport, bucket=self.bucket, limit=limit
        )


# --- deep retrieval --------------------------------------------------------


@dataclass(frozen=True)
class DeepRetrievalResult:
    papers: tuple[PaperMetadata, ...]
    degraded: bool = False
    source_errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()


def deep_retrieve(
    index: CorpusIndex,
    plan: QueryPlan,
    limits: RetrievalLimits | None = None,
    sources: Sequence[ExternalSource] | ExternalSource | None = None,
) -> DeepRetrievalResult:
    """Execute every search query of a plan and merge the candidates.

    Per query, local documents matching the Boolean expression are ranked
    by BM25 over the query's plain rendering (citations and title break
    ties) and capped at ``per_query_cap``; external results follow in
    source order.  Candidates are deduplicated by paper key, keeping the
    record with more populated fields, and keep first-seen order across
    queries.  A failing source degrades the result instead of failing it.
    """
    limits = limits or RetrievalLimits()
    if sources is None:
        source_list: list[ExternalSource] = []
    elif isinstance(sources, ExternalSource):
        source_list = [sources]
    else:
        source_list = list(sources)

    merged: list[PaperMetadata] = []
    positions: dict[str, int] = {}
    degraded = False
    source_errors: list[str] = []
    warnings: list[str] = []

    def consider(paper: PaperMetadata) -> None:
        key = normalize_paper_key(paper)
        at = positions.get(key)
        if at is None:
            positions[key] = len(merged)
            merged.append(paper)
        elif paper.field_completeness() > merged[at].field_completeness():
            merged[at] = paper

    for ast in plan.search_queries:
        plain = render_query(ast, dialect="plain")
        scores = bm25_scores(index, tokenize(plain))
        matched = [
            doc_id
            for doc_id in range(len(index.documents))
            if match_tokens(ast, index.doc_tokens[doc_id], index.doc_token_sets[doc_id])
        ]
        for doc_id in _rank_doc_ids(index, matched, scores)[: limits.per_query_cap]:
            consider(index.documents[doc_id])
        for source in source_list:
            try:
                fetched = source.search(ast, limit=limits.per_query_cap)
            except (SourceError, RateLimitExceeded) as exc:
                degraded = True
                source_errors.append(str(exc))
                continue
            warnings.extend(fetched.warnings)
            for paper in fetched.papers[: limits.per_query_cap]:
                consider(paper)

    return DeepRetrievalResult(
        papers=tuple(merged[: limits.max_candidates]),
        degraded=degraded,
        source_errors=tuple(source_errors),
        warnings=tuple(warnings),
    )
