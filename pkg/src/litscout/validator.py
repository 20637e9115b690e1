"""Criteria-based paper validation through a model backend.

Every candidate paper is assessed against each criterion, evidence quotes
are verified as substrings of the paper's own metadata, and the weighted
verdict score decides the Perfect/Partial/No classification.  Candidate
validation runs with bounded parallelism but always returns the same,
deterministically ordered verdict list.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from litscout.core.types import (
    AssessmentVerdict,
    CriteriaSet,
    CriterionAssessment,
    EvidenceSpan,
    PaperClassification,
    PaperMetadata,
    PaperVerdict,
    QueryPlan,
    ResearchQuery,
)
from litscout.errors import AssessmentParseError, InvariantError, LitScoutError
from litscout.llmgate import (
    Backend,
    PromptBundle,
    generate_with_schema,
    load_template,
    render_template,
)
from litscout.retrieval import citation_sort_value, title_sort_key

DEFAULT_VERDICT_VALUES: Mapping[AssessmentVerdict, float] = {
    AssessmentVerdict.SUPPORT: 1.0,
    AssessmentVerdict.SOMEWHAT_SUPPORT: 0.5,
    AssessmentVerdict.INSUFFICIENT_INFORMATION: 0.25,
    AssessmentVerdict.REJECT: 0.0,
}


@dataclass(frozen=True)
class ScoringConfig:
    """Verdict weights and thresholds for scoring and classification."""

    verdict_values: Mapping[AssessmentVerdict, float] = field(
        default_factory=lambda: dict(DEFAULT_VERDICT_VALUES)
    )
    theta_no: float = 0.35
    concurrency_limit: int = 4

    def __post_init__(self):
        values = dict(self.verdict_values)
        object.__setattr__(self, "verdict_values", values)
        for verdict in AssessmentVerdict:
            if verdict not in values:
                raise InvariantError(f"verdict_values must cover {verdict.value}")
        for verdict, value in values.items():
            if not (isinstance(value, (int, float)) and 0.0 <= float(value) <= 1.0):
                raise InvariantError(f"value for {verdict.value} must lie in [0, 1]")
        if not (isinstance(self.theta_no, (int, float)) and 0.0 < self.theta_no < 1.0):
            raise InvariantError("theta_no must lie in (0, 1)")
        if not (isinstance(self.concurrency_limit, int) and self.concurrency_limit >= 1):
            raise InvariantError("concurrency_limit must be a positive integer")


def _join(values: Sequence[str]) -> str:
    return ", ".join(values)


def paper_field_text(paper: PaperMetadata, source: str) -> str | None:
    """Text content of one metadata field as rendered into the prompt.

    Returns None for sources that do not name a known field.
    """
    mapping: dict[str, str] = {
        "paper_id": paper.paper_id,
        "title": paper.title,
        "authors": _join(paper.authors),
        "affiliations": _join(paper.affiliations),
        "venue": paper.venue,
        "conference_journal": paper.venue,
        "venue_type": paper.venue_type,
        "conference_journal_type": paper.venue_type,
        "research_field": _join(paper.research_fields),
        "research_fields": _join(paper.research_fields),
        "doi": paper.doi or "",
        "publication_date": paper.publication_date.isoformat() if paper.publication_date else "",
        "abstract": paper.abstract,
        "citation_count": str(paper.citation_count) if paper.citation_count is not None else "",
        "source_url": paper.source_url or "",
    }
    return mapping.get(source.strip().lower())


def build_validation_prompt(
    query: ResearchQuery, criteria: CriteriaSet, paper: PaperMetadata
) -> PromptBundle:
    """Prompt asking the backend to assess one paper against the criteria."""
    criteria_block = "\n".join(
        f"  <criterion_{i}>{c.description}</criterion_{i}>"
        for i, c in enumerate(criteria, start=1)
    )
    info_lines = [
        ("title", paper.title),
        ("authors", _join(paper.authors)),
        ("affiliations", _join(paper.affiliations)),
        ("conference_journal", paper.venue),
        ("conference_journal_type", paper.venue_type),
        ("research_field", _join(paper.research_fields)),
        ("doi", paper.doi or ""),
        ("publication_date", paper.publication_date.isoformat() if paper.publication_date else ""),
        ("abstract", paper.abstract),
        ("citation_count", str(paper.citation_count) if paper.citation_count is not None else ""),
        ("source_url", paper.source_url or ""),
    ]
    paper_info_block = "\n".join(f"  <{tag}>{value}</{tag}>" for tag, value in info_lines)
    user = render_template(
        load_template("validation_user.txt"),
        {
            "timestamp": query.timestamp.isoformat(),
            "user_query": query.text,
            "criteria_block": criteria_block,
            "paper_info_block": paper_info_block,
        },
    )
    user = f"{user}\n\n{load_template('validation_output_format.txt')}"
    return PromptBundle(system=load_template("validation_system.txt"), user=user)


def parse_assessments(
    value: Any, criteria: CriteriaSet
) -> tuple[tuple[CriterionAssessment, ...], str]:
    """Validate an assessment response: one entry per criterion plus summary.

    All violations are collected before raising; the returned assessments
    follow the criteria order regardless of response order.
    """
    violations: list[str] = []
    if not isinstance(value, dict):
        raise AssessmentParseError(["response must be a JSON object"])

    expected_ids = [c.id for c in criteria]
    seen_ids: set[str] = set()
    by_id: dict[str, CriterionAssessment] = {}
    entries = value.get("criteria_assessment")
    if not isinstance(entries, list):
        violations.append('"criteria_assessment" must be a list')
        entries = []
    for i, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict):
            violations.append(f"assessment {i} must be an object")
            continue
        criterion_id = entry.get("criterion_id")
        if not isinstance(criterion_id, str) or not criterion_id:
            violations.append(f'assessment {i}: "criterion_id" must be a non-empty string')
            continue
        if criterion_id not in expected_ids:
            violations.append(f"assessment {i}: unknown criterion_id {criterion_id!r}")
            continue
        if criterion_id in seen_ids:
            violations.append(f"duplicate assessment for criterion {criterion_id!r}")
            continue
        seen_ids.add(criterion_id)
        label = entry.get("assessment")
        verdict: AssessmentVerdict | None = None
        try:
            verdict = AssessmentVerdict(label)
        except ValueError:
            legal = ", ".join(v.value for v in AssessmentVerdict)
            violations.append(
                f"assessment {i}: unknown verdict {label!r}; expected one of: {legal}"
            )
        explanation = entry.get("explanation")
        if not (isinstance(explanation, str) and explanation.strip()):
            violations.append(f'assessment {i}: "explanation" must be a non-empty string')
            explanation = None
        spans: list[EvidenceSpan] = []
        raw_evidence = entry.get("evidence", [])
        if not isinstance(raw_evidence, list):
            violations.append(f'assessment {i}: "evidence" must be a list')
            raw_evidence = []
        for j, raw_span in enumerate(raw_evidence, start=1):
            if not isinstance(raw_span, dict):
                violations.append(f"assessment {i} evidence {j} must be an object")
                continue
            source = raw_span.get("source")
            text = raw_span.get("text")
            if not (isinstance(source, str) and source.strip()):
                violations.append(f'assessment {i} evidence {j}: "source" must be a non-empty string')
                continue
            if not (isinstance(text, str) and text.strip()):
                violations.append(f'assessment {i} evidence {j}: "text" must be a non-empty string')
                continue
            spans.append(EvidenceSpan(source=source, text=text, verified=False))
        if verdict is not None and explanation is not None:
            by_id[criterion_id] = CriterionAssessment(
                criterion_id=criterion_id,
                verdict=verdict,
                explanation=explanation,
                evidence=tuple(spans),
            )

    for criterion_id in expected_ids:
        if criterion_id not in seen_ids:
            violations.append(f"missing assessment for criterion {criterion_id!r}")

    summary = value.get("summary")
    if not (isinstance(summary, str) and summary.strip()):
        violations.append('"summary" must be a non-empty string')

    if violations:
        raise AssessmentParseError(violations)

    ordered = tuple(by_id[criterion_id] for criterion_id in expected_ids)
    return ordered, summary


def _normalize_for_match(text: str) -> str:
    return " ".join(text.split()).casefold()


def verify_evidence(
    assessments: Sequence[CriterionAssessment], paper: PaperMetadata
) -> tuple[CriterionAssessment, ...]:
    """Mark each evidence span verified iff it quotes its claimed field.

    A span verifies when its text, whitespace-normalized and
    case-insensitive, is a substring of the named metadata field.  Spans
    citing unknown fields stay unverified without failing.  Verdicts are
    never altered, but a support or somewhat_support assessment with no
    verified span is flagged low-confidence.
    """
    updated: list[CriterionAssessment] = []
    for assessment in assessments:
        spans: list[EvidenceSpan] = []
        for span in assessment.evidence:
            field_text = paper_field_text(paper, span.source)
            verified = False
            if field_text is not None:
                needle = _normalize_for_match(span.text)
                verified = bool(needle) and needle in _normalize_for_match(field_text)
            spans.append(EvidenceSpan(source=span.source, text=span.text, verified=verified))
        needs_evidence = assessment.verdict in (
            AssessmentVerdict.SUPPORT,
            AssessmentVerdict.SOMEWHAT_SUPPORT,
        )
        low_confidence = assessment.low_confidence or (
            needs_evidence and not any(span.verified for span in spans)
        )
        updated.append(
            CriterionAssessment(
                criterion_id=assessment.criterion_id,
                verdict=assessment.verdict,
                explanation=assessment.explanation,
                evidence=tuple(spans),
                low_confidence=low_confidence,
            )
        )
    return tuple(updated)


def score_paper(
    assessments: Sequence[CriterionAssessment],
    criteria: CriteriaSet,
    config: ScoringConfig | None = None,
) -> float:
    """Weighted verdict score in [0, 1]: sum of weight times verdict value."""
    config = config or ScoringConfig()
    by_id = {a.criterion_id: a for a in assessments}
    total = 0.0
    for criterion in criteria:
        assessment = by_id.get(criterion.id)
        if assessment is None:
            raise InvariantError(f"no assessment for criterion {criterion.id!r}")
        total += criterion.weight * config.verdict_values[assessment.verdict]
    return min(1.0, max(0.0, total))


def classify(
    score: float,
    assessments: Sequence[CriterionAssessment],
    config: ScoringConfig | None = None,
) -> PaperClassification:
    """Perfect when every criterion is supported, No when the paper is
    rejected outright or scores below the threshold, Partial otherwise."""
    config = config or ScoringConfig()
    verdicts = [a.verdict for a in assessments]
    if not verdicts:
        raise InvariantError("at least one assessment is required")
    if all(v is AssessmentVerdict.SUPPORT for v in verdicts):
        return PaperClassification.PERFECT
    if score < config.theta_no or all(v is AssessmentVerdict.REJECT for v in verdicts):
        return PaperClassification.NO
    return PaperClassification.PARTIAL


def assess_paper(
    query: ResearchQuery,
    plan: QueryPlan,
    paper: PaperMetadata,
    backend: Backend,
    config: ScoringConfig | None = None,
) -> PaperVerdict:
    """Run the full validation pipeline for one paper.

    Backend, extraction, or schema failures never escape: they produce an
    error verdict (classification No, score 0, every criterion rejected)
    whose texts carry the failure reason.
    """
    config = config or ScoringConfig()
    criteria = plan.criteria
    try:
        bundle = build_validation_prompt(query, criteria, paper)
        result = generate_with_schema(
            bundle, backend, lambda value: parse_assessments(value, criteria)
        )
        assessments, summary = result.value
        assessments = verify_evidence(assessments, paper)
        score = score_paper(assessments, criteria, config)
        classification = classify(score, assessments, config)
        return PaperVerdict(
            paper_id=paper.paper_id,
            classification=classification,
            score=score,
            assessments=assessments,
            summary=summary,
        )
    except LitScoutError as exc:
        message = f"validation failed: {exc}"
        fallback = tuple(
            CriterionAssessment(
                criterion_id=criterion.id,
                verdict=AssessmentVerdict.REJECT,
                explanation=message,
                evidence=(),
                low_confidence=True,
            )
            for criterion in criteria
        )
        return PaperVerdict(
            paper_id=paper.paper_id,
            classification=PaperClassification.NO,
            score=0.0,
            assessments=fallback,
            summary=message,
            error=True,
        )


def verdict_order_key(verdict: PaperVerdict, paper: PaperMetadata | None) -> tuple:
    """Deterministic result ordering: score, then citations, then title."""
    if paper is None:
        return (-verdict.score, 1, 0, verdict.paper_id)
    return (-verdict.score, 0, -citation_sort_value(paper), title_sort_key(paper))


def validate_candidates(
    query: ResearchQuery,
    plan: QueryPlan,
    papers: Sequence[PaperMetadata],
    backend: Backend,
    config: ScoringConfig | None = None,
    *,
    on_verdict: Callable[[PaperVerdict], None] | None = None,
) -> list[PaperVerdict]:
    """Assess every candidate with bounded parallelism.

    At most ``config.concurrency_limit`` backend calls run at once.
    ``on_verdict`` observes verdicts in completion order; the returned
    list is always ordered by score descending (citation count, then
    normalized title, break ties), independent of completion timing.
    """
    config = config or ScoringConfig()
    papers = list(papers)
    if not papers:
        return []
    by_id = {paper.paper_id: paper for paper in papers}
    results: list[PaperVerdict] = []
    with ThreadPoolExecutor(max_workers=config.concurrency_limit) as pool:
        futures = [
            pool.submit(assess_paper, query, plan, paper, backend, config) for paper in papers
        ]
        for future in as_completed(futures):
            verdict = future.result()
            results.append(verdict)
            if on_verdict is not None:
                on_verdict(verdict)
    results.sort(key=lambda v: verdict_order_key(v, by_id.get(v.paper_id)))
    return results
