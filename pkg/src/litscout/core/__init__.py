"""Core value types and canonical serialization."""

from litscout.core.serialize import (
    canonical_json,
    canonical_parse,
    canonical_serialize,
    from_jsonable,
    to_jsonable,
)
from litscout.core.types import (
    WEIGHT_SUM_TOLERANCE,
    AssessmentVerdict,
    CriteriaSet,
    Criterion,
    CriterionAssessment,
    CriterionKind,
    EvidenceSpan,
    PaperClassification,
    PaperMetadata,
    PaperVerdict,
    ResearchQuery,
    VENUE_TYPES,
    normalize_paper_key,
)

__all__ = [
    "AssessmentVerdict",
    "CriteriaSet",
    "Criterion",
    "CriterionAssessment",
    "CriterionKind",
    "EvidenceSpan",
    "PaperClassification",
    "PaperMetadata",
    "PaperVerdict",
    "ResearchQuery",
    "VENUE_TYPES",
    "WEIGHT_SUM_TOLERANCE",
    "canonical_json",
    "canonical_parse",
    "canonical_serialize",
    "from_jsonable",
    "normalize_paper_key",
    "to_jsonable",
]
