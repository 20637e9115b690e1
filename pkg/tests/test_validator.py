"""Paper validation: prompts, assessment parsing, evidence, scoring."""

from __future__ import annotations

import json
from datetime import date, datetime, timezone

import pytest

from litscout.boolquery import parse_boolean_query
from litscout.core.types import (
    AssessmentVerdict,
    CriteriaSet,
    Criterion,
    CriterionAssessment,
    CriterionKind,
    EvidenceSpan,
    PaperClassification,
    PaperMetadata,
    QueryPlan,
    ResearchQuery,
)
from litscout.errors import AssessmentParseError, InvariantError
from litscout.llmgate import MockBackend, repair_bundle
from litscout.validator import (
    DEFAULT_VERDICT_VALUES,
    ScoringConfig,
    assess_paper,
    build_validation_prompt,
    classify,
    paper_field_text,
    parse_assessments,
    score_paper,
    validate_candidates,
    verdict_order_key,
    verify_evidence,
)

from conftest import assessment_response


def crit(cid: str, weight: float, description: str | None = None) -> Criterion:
    return Criterion(
        id=cid,
        kind=CriterionKind.TASK,
        name=f"name {cid}",
        description=description or f"description for {cid}",
        weight=weight,
    )


def criteria_set(*weights: float) -> CriteriaSet:
    return CriteriaSet(
        criteria=tuple(crit(f"c{i + 1}", w) for i, w in enumerate(weights))
    )


def make_query() -> ResearchQuery:
    return ResearchQuery(
        text="methods for remote work productivity",
        timestamp=datetime(2026, 1, 15, 9, 30, tzinfo=timezone.utc),
    )


def make_plan(criteria: CriteriaSet) -> QueryPlan:
    return QueryPlan(
        search_queries=(parse_boolean_query("remote AND work"), parse_boolean_query("productivity")),
        criteria=criteria,
        source_query=make_query(),
    )


def full_paper() -> PaperMetadata:
    return PaperMetadata(
        paper_id="p1",
        title="Remote Work and Productivity",
        authors=("Ada Lovelace", "Ben Field"),
        affiliations=("Example Lab",),
        venue="CHI",
        venue_type="conference",
        research_fields=("hci", "economics"),
        doi="10.1/remote",
        publication_date=date(2024, 6, 1),
        abstract="We study hybrid schedules and measure productivity outcomes.",
        citation_count=42,
        source_url="https://example.org/p1",
    )


def assessment(
    cid: str,
    verdict: AssessmentVerdict,
    evidence: tuple[EvidenceSpan, ...] = (),
    low_confidence: bool = False,
) -> CriterionAssessment:
    return CriterionAssessment(
        criterion_id=cid,
        verdict=verdict,
        explanation=f"{cid}: {verdict.value}",
        evidence=evidence,
        low_confidence=low_confidence,
    )


# --- scoring configuration --------------------------------------------------


class TestScoringConfig:
    def test_defaults(self):
        config = ScoringConfig()
        assert config.verdict_values[AssessmentVerdict.SUPPORT] == 1.0
        assert config.verdict_values[AssessmentVerdict.SOMEWHAT_SUPPORT] == 0.5
        assert config.verdict_values[AssessmentVerdict.INSUFFICIENT_INFORMATION] == 0.25
        assert config.verdict_values[AssessmentVerdict.REJECT] == 0.0
        assert config.theta_no == 0.35
        assert config.concurrency_limit == 4

    def test_values_must_cover_every_verdict(self):
        partial = {AssessmentVerdict.SUPPORT: 1.0}
        with pytest.raises(InvariantError, match="must cover"):
            ScoringConfig(verdict_values=partial)

    def test_values_must_lie_in_unit_interval(self):
        values = dict(DEFAULT_VERDICT_VALUES)
        values[AssessmentVerdict.REJECT] = -0.1
        with pytest.raises(InvariantError, match=r"must lie in \[0, 1\]"):
            ScoringConfig(verdict_values=values)

    @pytest.mark.parametrize("theta", [0.0, 1.0, -0.2, "0.5"])
    def test_theta_bounds(self, theta):
        with pytest.raises(InvariantError, match="theta_no"):
            ScoringConfig(theta_no=theta)

    @pytest.mark.parametrize("limit", [0, -2, 1.5])
    def test_concurrency_limit(self, limit):
        with pytest.raises(InvariantError, match="concurrency_limit"):
            ScoringConfig(concurrency_limit=limit)


# --- prompt field rendering -------------------------------------------------


class TestPaperFieldText:
    def test_all_known_sources(self):
        paper = full_paper()
        assert paper_field_text(paper, "title") == "Remote Work and Productivity"
        assert paper_field_text(paper, "authors") == "Ada Lovelace, Ben Field"
        assert paper_field_text(paper, "affiliations") == "Example Lab"
        assert paper_field_text(paper, "venue") == "CHI"
        assert paper_field_text(paper, "conference_journal") == "CHI"
        assert paper_field_text(paper, "venue_type") == "conference"
        assert paper_field_text(paper, "conference_journal_type") == "conference"
        assert paper_field_text(paper, "research_field") == "hci, economics"
        assert paper_field_text(paper, "research_fields") == "hci, economics"
        assert paper_field_text(paper, "doi") == "10.1/remote"
        assert paper_field_text(paper, "publication_date") == "2024-06-01"
        assert paper_field_text(paper, "abstract").startswith("We study")
        assert paper_field_text(paper, "citation_count") == "42"
        assert paper_field_text(paper, "source_url") == "https://example.org/p1"

    def test_source_name_is_normalized(self):
        assert paper_field_text(full_paper(), "  Title ") == "Remote Work and Productivity"

    def test_unknown_source_returns_none(self):
        assert paper_field_text(full_paper(), "footnotes") is None

    def test_missing_optionals_render_empty(self):
        paper = PaperMetadata(paper_id="p", title="T")
        assert paper_field_text(paper, "doi") == ""
        assert paper_field_text(paper, "publication_date") == ""
        assert paper_field_text(paper, "citation_count") == ""
        assert paper_field_text(paper, "authors") == ""


class TestBuildValidationPrompt:
    def test_criteria_block_numbers_from_one(self):
        criteria = CriteriaSet(criteria=(crit("c1", 0.6, "first rule"), crit("c2", 0.4, "second rule")))
        bundle = build_validation_prompt(make_query(), criteria, full_paper())
        assert "  <criterion_1>first rule</criterion_1>" in bundle.user
        assert "  <criterion_2>second rule</criterion_2>" in bundle.user

    def test_paper_info_block_lists_every_field(self):
        bundle = build_validation_prompt(make_query(), criteria_set(1.0), full_paper())
        for tag, value in [
            ("title", "Remote Work and Productivity"),
            ("authors", "Ada Lovelace, Ben Field"),
            ("affiliations", "Example Lab"),
            ("conference_journal", "CHI"),
            ("conference_journal_type", "conference"),
            ("research_field", "hci, economics"),
            ("doi", "10.1/remote"),
            ("publication_date", "2024-06-01"),
            ("abstract", "We study hybrid schedules and measure productivity outcomes."),
            ("citation_count", "42"),
            ("source_url", "https://example.org/p1"),
        ]:
            assert f"  <{tag}>{value}</{tag}>" in bundle.user

    def test_query_and_timestamp_present(self):
        bundle = build_validation_prompt(make_query(), criteria_set(1.0), full_paper())
        assert "methods for remote work productivity" in bundle.user
        assert "2026-01-15T09:30:00+00:00" in bundle.user
        assert bundle.system.strip()

    def test_deterministic_and_paper_sensitive(self):
        query, criteria = make_query(), criteria_set(1.0)
        a = build_validation_prompt(query, criteria, full_paper())
        b = build_validation_prompt(query, criteria, full_paper())
        other = build_validation_prompt(
            query, criteria, PaperMetadata(paper_id="q", title="Another Paper")
        )
        assert a.digest() == b.digest()
        assert a.digest() != other.digest()


# --- assessment parsing -----------------------------------------------------


def response_dict(pairs, summary="overall fit", evidence=None):
    return json.loads(assessment_response(pairs, summary=summary, evidence=evidence))


class TestParseAssessments:
    def test_valid_response_reordered_to_criteria_order(self):
        criteria = criteria_set(0.6, 0.4)
        value = response_dict(
            [("c2", "reject"), ("c1", "support")],
            evidence={"c1": [{"source": "title", "text": "Remote Work"}]},
        )
        assessments, summary = parse_assessments(value, criteria)
        assert [a.criterion_id for a in assessments] == ["c1", "c2"]
        assert assessments[0].verdict is AssessmentVerdict.SUPPORT
        assert assessments[1].verdict is AssessmentVerdict.REJECT
        assert assessments[0].evidence == (
            EvidenceSpan(source="title", text="Remote Work", verified=False),
        )
        assert summary == "overall fit"

    def test_non_object_response(self):
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(["not", "an", "object"], criteria_set(1.0))
        assert excinfo.value.violations == ["response must be a JSON object"]

    def test_missing_assessment_list(self):
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments({"summary": "s"}, criteria_set(1.0))
        assert '"criteria_assessment" must be a list' in excinfo.value.violations
        assert "missing assessment for criterion 'c1'" in excinfo.value.violations

    def test_unknown_verdict_names_legal_values(self):
        value = response_dict([("c1", "maybe")])
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        [violation] = [v for v in excinfo.value.violations if "unknown verdict" in v]
        for legal in ("support", "somewhat_support", "insufficient_information", "reject"):
            assert legal in violation

    def test_unknown_criterion_id(self):
        value = response_dict([("c1", "support"), ("c9", "support")])
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        assert "assessment 2: unknown criterion_id 'c9'" in excinfo.value.violations

    def test_duplicate_criterion_id(self):
        value = response_dict([("c1", "support"), ("c1", "reject")])
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        assert "duplicate assessment for criterion 'c1'" in excinfo.value.violations

    def test_missing_criterion_reported_by_id(self):
        value = response_dict([("c1", "support")])
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(0.5, 0.5))
        assert "missing assessment for criterion 'c2'" in excinfo.value.violations

    def test_empty_explanation(self):
        value = response_dict([("c1", "support")])
        value["criteria_assessment"][0]["explanation"] = "   "
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        assert 'assessment 1: "explanation" must be a non-empty string' in excinfo.value.violations

    def test_empty_summary(self):
        value = response_dict([("c1", "support")], summary="  ")
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        assert '"summary" must be a non-empty string' in excinfo.value.violations

    def test_bad_evidence_shapes(self):
        value = response_dict([("c1", "support")])
        value["criteria_assessment"][0]["evidence"] = [
            "not an object",
            {"source": " ", "text": "x"},
            {"source": "title", "text": ""},
        ]
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        violations = excinfo.value.violations
        assert "assessment 1 evidence 1 must be an object" in violations
        assert 'assessment 1 evidence 2: "source" must be a non-empty string' in violations
        assert 'assessment 1 evidence 3: "text" must be a non-empty string' in violations

    def test_evidence_must_be_list(self):
        value = response_dict([("c1", "support")])
        value["criteria_assessment"][0]["evidence"] = {"source": "title"}
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(1.0))
        assert 'assessment 1: "evidence" must be a list' in excinfo.value.violations

    def test_all_violations_collected_at_once(self):
        value = {
            "criteria_assessment": [
                {"criterion_id": "c1", "assessment": "perhaps", "explanation": ""},
                "garbage",
            ],
            "summary": "",
        }
        with pytest.raises(AssessmentParseError) as excinfo:
            parse_assessments(value, criteria_set(0.5, 0.5))
        violations = excinfo.value.violations
        assert len(violations) == 5
        assert any("unknown verdict" in v for v in violations)
        assert any("explanation" in v for v in violations)
        assert "assessment 2 must be an object" in violations
        assert "missing assessment for criterion 'c2'" in violations
        assert '"summary" must be a non-empty string' in violations

    def test_evidence_defaults_to_empty(self):
        value = response_dict([("c1", "reject")])
        del value["criteria_assessment"][0]["evidence"]
        assessments, _ = parse_assessments(value, criteria_set(1.0))
        assert assessments[0].evidence == ()


# --- evidence verification --------------------------------------------------


class TestVerifyEvidence:
    def test_exact_quote_verifies(self):
        spans = (EvidenceSpan(source="title", text="Remote Work"),)
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SUPPORT, spans)], full_paper()
        )
        assert updated.evidence[0].verified
        assert not updated.low_confidence

    def test_match_ignores_case_and_whitespace(self):
        spans = (EvidenceSpan(source="abstract", text="HYBRID   schedules"),)
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SUPPORT, spans)], full_paper()
        )
        assert updated.evidence[0].verified

    def test_casefold_handles_sharp_s(self):
        paper = PaperMetadata(paper_id="p", title="Die Größe der Modelle")
        spans = (EvidenceSpan(source="title", text="GRÖSSE"),)
        (updated,) = verify_evidence([assessment("c1", AssessmentVerdict.SUPPORT, spans)], paper)
        assert updated.evidence[0].verified

    def test_non_quote_stays_unverified(self):
        spans = (EvidenceSpan(source="title", text="unrelated words"),)
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SUPPORT, spans)], full_paper()
        )
        assert not updated.evidence[0].verified
        assert updated.low_confidence

    def test_unknown_source_stays_unverified_without_error(self):
        spans = (EvidenceSpan(source="appendix", text="Remote Work"),)
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SUPPORT, spans)], full_paper()
        )
        assert not updated.evidence[0].verified

    def test_supportive_verdict_without_any_verified_span_is_low_confidence(self):
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SOMEWHAT_SUPPORT)], full_paper()
        )
        assert updated.low_confidence
        assert updated.verdict is AssessmentVerdict.SOMEWHAT_SUPPORT

    def test_reject_without_evidence_keeps_confidence(self):
        (updated,) = verify_evidence([assessment("c1", AssessmentVerdict.REJECT)], full_paper())
        assert not updated.low_confidence

    def test_existing_low_confidence_is_never_cleared(self):
        spans = (EvidenceSpan(source="title", text="Remote Work"),)
        (updated,) = verify_evidence(
            [assessment("c1", AssessmentVerdict.SUPPORT, spans, low_confidence=True)],
            full_paper(),
        )
        assert updated.low_confidence

    def test_verdicts_never_altered(self):
        items = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.INSUFFICIENT_INFORMATION),
        ]
        updated = verify_evidence(items, full_paper())
        assert [a.verdict for a in updated] == [a.verdict for a in items]


# --- scoring and classification --------------------------------------------


class TestScoreAndClassify:
    def test_weighted_sum(self):
        criteria = criteria_set(0.6, 0.4)
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.SOMEWHAT_SUPPORT),
        ]
        # 0.6 * 1.0 + 0.4 * 0.5
        assert score_paper(assessments, criteria) == pytest.approx(0.8, abs=1e-12)

    def test_equal_weights_support_plus_somewhat_is_three_quarters(self):
        criteria = criteria_set(0.5, 0.5)
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.SOMEWHAT_SUPPORT),
        ]
        score = score_paper(assessments, criteria)
        assert score == pytest.approx(0.75, abs=1e-12)
        assert classify(score, assessments) is PaperClassification.PARTIAL

    def test_insufficient_information_counts_a_quarter(self):
        criteria = criteria_set(0.6, 0.4)
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.INSUFFICIENT_INFORMATION),
        ]
        assert score_paper(assessments, criteria) == pytest.approx(0.7, abs=1e-12)

    def test_missing_assessment_is_an_error(self):
        criteria = criteria_set(0.5, 0.5)
        with pytest.raises(InvariantError, match="no assessment for criterion 'c2'"):
            score_paper([assessment("c1", AssessmentVerdict.SUPPORT)], criteria)

    def test_all_support_is_perfect(self):
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.SUPPORT),
        ]
        assert classify(1.0, assessments) is PaperClassification.PERFECT

    def test_score_at_threshold_is_partial(self):
        criteria = criteria_set(0.35, 0.65)
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.REJECT),
        ]
        score = score_paper(assessments, criteria)
        assert score == pytest.approx(0.35, abs=1e-12)
        assert classify(score, assessments) is PaperClassification.PARTIAL

    def test_score_below_threshold_is_no(self):
        criteria = criteria_set(0.3, 0.7)
        assessments = [
            assessment("c1", AssessmentVerdict.SUPPORT),
            assessment("c2", AssessmentVerdict.REJECT),
        ]
        score = score_paper(assessments, criteria)
        assert score == pytest.approx(0.3, abs=1e-12)
        assert classify(score, assessments) is PaperClassification.NO

    def test_unanimous_reject_is_no_even_with_high_values(self):
        values = dict(DEFAULT_VERDICT_VALUES)
        values[AssessmentVerdict.REJECT] = 0.9
        config = ScoringConfig(verdict_values=values)
        assessments = [
            assessment("c1", AssessmentVerdict.REJECT),
            assessment("c2", AssessmentVerdict.REJECT),
        ]
        score = score_paper(assessments, criteria_set(0.5, 0.5), config)
        assert score == pytest.approx(0.9, abs=1e-12)
        assert classify(score, assessments, config) is PaperClassification.NO

    def test_empty_assessments_rejected(self):
        with pytest.raises(InvariantError, match="at least one assessment"):
            classify(0.5, [])


# --- end-to-end assessment --------------------------------------------------


def scripted_backend(query, criteria, paper, response_text):
    bundle = build_validation_prompt(query, criteria, paper)
    return MockBackend({bundle.digest(): response_text})


class TestAssessPaper:
    def test_successful_assessment(self):
        query, criteria, paper = make_query(), criteria_set(0.6, 0.4), full_paper()
        response = assessment_response(
            [("c1", "support"), ("c2", "somewhat_support")],
            summary="close but incomplete",
            evidence={"c1": [{"source": "title", "text": "Remote Work"}]},
        )
        backend = scripted_backend(query, criteria, paper, response)
        verdict = assess_paper(query, make_plan(criteria), paper, backend)
        assert verdict.paper_id == "p1"
        assert verdict.classification is PaperClassification.PARTIAL
        assert verdict.score == pytest.approx(0.8, abs=1e-12)
        assert verdict.summary == "close but incomplete"
        assert verdict.error is False
        assert verdict.assessments[0].evidence[0].verified
        assert verdict.assessments[1].low_confidence

    def test_invalid_then_repaired_response(self):
        query, criteria, paper = make_query(), criteria_set(1.0), full_paper()
        bundle = build_validation_prompt(query, criteria, paper)
        bad = json.dumps({"criteria_assessment": [], "summary": "s"})
        try:
            parse_assessments(json.loads(bad), criteria)
            raise AssertionError("expected violations")
        except AssessmentParseError as exc:
            violations = exc.violations
        good = assessment_response([("c1", "support")], summary="fits")
        backend = MockBackend(
            {
                bundle.digest(): bad,
                repair_bundle(bundle, violations).digest(): good,
            }
        )
        verdict = assess_paper(query, make_plan(criteria), paper, backend)
        assert verdict.classification is PaperClassification.PERFECT
        assert verdict.error is False
        assert len(backend.calls) == 2

    def test_backend_failure_becomes_error_verdict(self):
        query, criteria, paper = make_query(), criteria_set(0.5, 0.5), full_paper()
        backend = MockBackend({})
        verdict = assess_paper(query, make_plan(criteria), paper, backend)
        assert verdict.error is True
        assert verdict.classification is PaperClassification.NO
        assert verdict.score == 0.0
        assert verdict.summary.startswith("validation failed:")
        assert [a.verdict for a in verdict.assessments] == [AssessmentVerdict.REJECT] * 2
        assert all(a.low_confidence for a in verdict.assessments)

    def test_never_valid_response_becomes_error_verdict(self):
        query, criteria, paper = make_query(), criteria_set(1.0), full_paper()
        backend = scripted_backend(query, criteria, paper, "not json at all")
        verdict = assess_paper(query, make_plan(criteria), paper, backend)
        assert verdict.error is True
        assert verdict.classification is PaperClassification.NO


# --- candidate validation ---------------------------------------------------


def build_candidates():
    # Scores: strong 1.0, partial 0.75, cited/uncited/titles 0.5 each, weak 0.0.
    specs = [
        ("strong", "support", "support", {"citation_count": 5}),
        ("partial", "support", "somewhat_support", {"citation_count": 50}),
        ("cited", "support", "reject", {"citation_count": 90}),
        ("uncited", "support", "reject", {}),
        ("titles-a", "support", "reject", {"citation_count": 30, "title": "An Early Title"}),
        ("titles-z", "support", "reject", {"citation_count": 30, "title": "Zpóźniejszy Title"}),
        ("weak", "reject", "reject", {"citation_count": 999}),
    ]
    query, criteria = make_query(), criteria_set(0.5, 0.5)
    papers, script = [], {}
    for pid, v1, v2, extra in specs:
        fields = {"title": f"Paper {pid}", "abstract": "body", **extra}
        paper = PaperMetadata(paper_id=pid, **fields)
        papers.append(paper)
        bundle = build_validation_prompt(query, criteria, paper)
        script[bundle.digest()] = assessment_response(
            [("c1", v1), ("c2", v2)], summary=f"summary for {pid}"
        )
    return query, criteria, papers, script


class TestValidateCandidates:
    def test_deterministic_order_by_score_citations_title(self):
        query, criteria, papers, script = build_candidates()
        plan = make_plan(criteria)
        results = validate_candidates(query, plan, papers, MockBackend(script))
        assert [v.paper_id for v in results] == [
            "strong",      # 1.0
            "partial",     # 0.75
            "cited",       # 0.5, 90 citations
            "titles-a",    # 0.5, 30 citations, "an early title"
            "titles-z",    # 0.5, 30 citations, "zpózniejszy..." sorts after
            "uncited",     # 0.5, unknown citations sort last
            "weak",        # 0.0
        ]

    def test_input_order_does_not_matter(self):
        query, criteria, papers, script = build_candidates()
        plan = make_plan(criteria)
        forward = validate_candidates(query, plan, papers, MockBackend(script))
        reversed_in = validate_candidates(query, plan, list(reversed(papers)), MockBackend(script))
        assert [v.paper_id for v in forward] == [v.paper_id for v in reversed_in]
        assert forward == reversed_in

    def test_concurrency_levels_agree(self):
        query, criteria, papers, script = build_candidates()
        plan = make_plan(criteria)
        serial = validate_candidates(
            query, plan, papers, MockBackend(script), ScoringConfig(concurrency_limit=1)
        )
        parallel = validate_candidates(
            query, plan, papers, MockBackend(script), ScoringConfig(concurrency_limit=4)
        )
        assert serial == parallel

    def test_on_verdict_sees_every_result_once(self):
        query, criteria, papers, script = build_candidates()
        plan = make_plan(criteria)
        streamed = []
        results = validate_candidates(
            query, plan, papers, MockBackend(script), on_verdict=streamed.append
        )
        assert sorted(v.paper_id for v in streamed) == sorted(v.paper_id for v in results)
        assert len(streamed) == len(papers)

    def test_empty_candidate_list(self):
        assert validate_candidates(make_query(), make_plan(criteria_set(1.0)), [], MockBackend({})) == []

    def test_order_key_places_unknown_papers_after_known(self):
        verdict = PaperVerdictFixture.verdict("x", 0.5)
        known = verdict_order_key(verdict, full_paper())
        unknown = verdict_order_key(verdict, None)
        assert unknown > known


class PaperVerdictFixture:
    @staticmethod
    def verdict(paper_id: str, score: float):
        from litscout.core.types import PaperVerdict

        return PaperVerdict(
            paper_id=paper_id,
            classification=PaperClassification.PARTIAL,
            score=score,
            assessments=(assessment("c1", AssessmentVerdict.SOMEWHAT_SUPPORT),),
            summary="s",
        )
