"""Evaluation reports for plan generation quality and verdict matching.

Generation quality compares generated plans against reference queries and
criteria with six text metrics, macro-averaged per item.  Matching quality
builds a verdict confusion matrix with per-category and overall accuracy.
Both reports render as aligned plain-text tables and as TSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from litscout.boolquery import render_query
from litscout.core.serialize import canonical_parse, parse_instant
from litscout.core.types import AssessmentVerdict, QueryPlan
from litscout.errors import InvariantError, MetricError
from litscout.evalkit.metrics import (
    HashedNgramEmbedder,
    bleu,
    length_ratio,
    rouge_l,
    rouge_n,
    semantic_similarity,
)

GENERATION_METRICS = (
    "semantic_similarity",
    "rouge1",
    "rouge2",
    "rouge_l",
    "bleu",
    "length_ratio",
)

GENERATION_COLUMNS = {
    "semantic_similarity": "Semantic Similarity",
    "rouge1": "ROUGE-1",
    "rouge2": "ROUGE-2",
    "rouge_l": "ROUGE-L",
    "bleu": "BLEU",
    "length_ratio": "Length Ratio",
}

# Fixed axis order for the confusion matrix and accuracy table.
VERDICT_ORDER = (
    AssessmentVerdict.INSUFFICIENT_INFORMATION,
    AssessmentVerdict.REJECT,
    AssessmentVerdict.SOMEWHAT_SUPPORT,
    AssessmentVerdict.SUPPORT,
)

VERDICT_LABELS = {
    AssessmentVerdict.INSUFFICIENT_INFORMATION: "Insufficient Information",
    AssessmentVerdict.REJECT: "Reject",
    AssessmentVerdict.SOMEWHAT_SUPPORT: "Somewhat Support",
    AssessmentVerdict.SUPPORT: "Support",
}


@dataclass(frozen=True)
class ReferenceCriterion:
    name: str
    description: str

    def __post_init__(self):
        if not (isinstance(self.name, str) and self.name.strip()):
            raise InvariantError("reference criterion name must be non-empty")
        if not (isinstance(self.description, str) and self.description.strip()):
            raise InvariantError("reference criterion description must be non-empty")


@dataclass(frozen=True)
class GenerationEvalItem:
    """One dataset row: a generated plan and its reference annotation."""

    generated: QueryPlan
    reference_queries: tuple[str, ...]
    reference_criteria: tuple[ReferenceCriterion, ...]
    item_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "reference_queries", tuple(self.reference_queries))
        object.__setattr__(self, "reference_criteria", tuple(self.reference_criteria))
        if not self.reference_queries:
            raise InvariantError("at least one reference query is required")
        if not self.reference_criteria:
            raise InvariantError("at least one reference criterion is required")


@dataclass(frozen=True)
class GenerationReport:
    items: int
    metrics: dict[str, float]
    per_item: tuple[dict[str, float], ...] = ()


def _criteria_text(pairs: Iterable[tuple[str, str]]) -> str:
    return "\n".join(f"{name}: {description}" for name, description in pairs)


def _field_metrics(candidate: str, reference: str, embedder: Callable) -> dict[str, float]:
    return {
        "semantic_similarity": semantic_similarity(candidate, reference, embedder),
        "rouge1": rouge_n(candidate, reference, 1).f1,
        "rouge2": rouge_n(candidate, reference, 2).f1,
        "rouge_l": rouge_l(candidate, reference).f1,
        "bleu": bleu(candidate, [reference]),
        "length_ratio": length_ratio(candidate, reference),
    }


def evaluate_generation(
    items: Sequence[GenerationEvalItem], embedder: Callable | None = None
) -> GenerationReport:
    """Score generated plans against references, macro-averaged.

    Per item, the generated queries (canonical renderings joined by
    newlines) are compared against the joined reference queries, and the
    generated criteria ("name: description" per line) against the
    reference criteria; each metric is the mean of those two field scores,
    then averaged across items.
    """
    if not items:
        raise MetricError("at least one evaluation item is required")
    embedder = embedder or HashedNgramEmbedder()
    per_item: list[dict[str, float]] = []
    for item in items:
        generated_queries = "\n".join(
            render_query(q, dialect="canonical") for q in item.generated.search_queries
        )
        reference_queries = "\n".join(item.reference_queries)
        generated_criteria = _criteria_text(
            (c.name, c.description) for c in item.generated.criteria
        )
        reference_criteria = _criteria_text(
            (c.name, c.description) for c in item.reference_criteria
        )
        fields = (
            _field_metrics(generated_queries, reference_queries, embedder),
            _field_metrics(generated_criteria, reference_criteria, embedder),
        )
        per_item.append(
            {name: (fields[0][name] + fields[1][name]) / 2.0 for name in GENERATION_METRICS}
        )
    metrics = {
        name: float(np.mean([row[name] for row in per_item])) for name in GENERATION_METRICS
    }
    return GenerationReport(items=len(items), metrics=metrics, per_item=tuple(per_item))


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = ["  ".join(header[i].ljust(widths[i]) for i in range(len(header))).rstrip()]
    lines.append("  ".join("-" * widths[i] for i in range(len(header))).rstrip())
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(header))).rstrip())
    return "\n".join(lines)


def _generation_cells(report: GenerationReport) -> list[str]:
    cells = []
    for name in GENERATION_METRICS:
        value = report.metrics[name]
        if name != "length_ratio":
            value *= 100.0
        cells.append(f"{value:.1f}")
    return cells


def generation_table(report: GenerationReport, label: str = "generated") -> str:
    """Aligned text table of generation metrics (rates shown as percentages)."""
    header = ["Model"] + [GENERATION_COLUMNS[name] for name in GENERATION_METRICS]
    return _format_table(header, [[label] + _generation_cells(report)])


def generation_tsv(report: GenerationReport, label: str = "generated") -> str:
    header = ["model"] + list(GENERATION_METRICS)
    row = [label] + _generation_cells(report)
    return "\t".join(header) + "\n" + "\t".join(row) + "\n"


# --- verdict matching -------------------------------------------------------


@dataclass(frozen=True)
class MatchingEvalItem:
    gold: AssessmentVerdict
    predicted: AssessmentVerdict
    item_id: str = ""

    def __post_init__(self):
        if not isinstance(self.gold, AssessmentVerdict) or not isinstance(
            self.predicted, AssessmentVerdict
        ):
            raise InvariantError("gold and predicted must be verdicts")


@dataclass(frozen=True)
class MatchingReport:
    """Gold-by-predicted confusion counts and the accuracies they imply."""

    confusion: tuple[tuple[int, ...], ...]
    per_category_accuracy: dict[AssessmentVerdict, float]
    overall_accuracy: float
    gold_counts: dict[AssessmentVerdict, int]
    items: int


def evaluate_matching(items: Sequence[MatchingEvalItem]) -> MatchingReport:
    """Confusion matrix over verdict pairs, rows gold and columns predicted.

    Per-category accuracy divides the diagonal count by the category's
    gold count (0.0 for categories never seen in gold); overall accuracy
    divides the diagonal total by the item count.
    """
    if not items:
        raise MetricError("at least one matching item is required")
    position = {verdict: i for i, verdict in enumerate(VERDICT_ORDER)}
    counts = [[0] * len(VERDICT_ORDER) for _ in VERDICT_ORDER]
    for item in items:
        counts[position[item.gold]][position[item.predicted]] += 1
    per_category: dict[AssessmentVerdict, float] = {}
    gold_counts: dict[AssessmentVerdict, int] = {}
    diagonal = 0
    for verdict in VERDICT_ORDER:
        row = counts[position[verdict]]
        total = sum(row)
        correct = row[position[verdict]]
        diagonal += correct
        gold_counts[verdict] = total
        per_category[verdict] = correct / total if total else 0.0
    return MatchingReport(
        confusion=tuple(tuple(row) for row in counts),
        per_category_accuracy=per_category,
        overall_accuracy=diagonal / len(items),
        gold_counts=gold_counts,
        items=len(items),
    )


def matching_table(report: MatchingReport, label: str = "predicted") -> str:
    """Aligned accuracy table (percentages, two decimals) plus confusion counts."""
    header = ["Model"] + [VERDICT_LABELS[v] for v in VERDICT_ORDER] + ["Overall Accuracy"]
    row = [label] + [
        f"{100.0 * report.per_category_accuracy[v]:.2f}" for v in VERDICT_ORDER
    ] + [f"{100.0 * report.overall_accuracy:.2f}"]
    accuracy = _format_table(header, [row])
    matrix_header = ["Gold \\ Predicted"] + [VERDICT_LABELS[v] for v in VERDICT_ORDER]
    matrix_rows = [
        [VERDICT_LABELS[v]] + [str(n) for n in report.confusion[i]]
        for i, v in enumerate(VERDICT_ORDER)
    ]
    return accuracy + "\n\n" + _format_table(matrix_header, matrix_rows)


def matching_tsv(report: MatchingReport, label: str = "predicted") -> str:
    header = ["model"] + [v.value for v in VERDICT_ORDER] + ["overall_accuracy"]
    row = [label] + [
        f"{100.0 * report.per_category_accuracy[v]:.2f}" for v in VERDICT_ORDER
    ] + [f"{100.0 * report.overall_accuracy:.2f}"]
    return "\t".join(header) + "\n" + "\t".join(row) + "\n"


# --- file loaders -----------------------------------------------------------


def _read_jsonl(path: str | Path) -> list[tuple[int, object]]:
    rows: list[tuple[int, object]] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rows.append((line_no, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise MetricError(f"{path} line {line_no}: invalid JSON: {exc.msg}") from None
    return rows


@dataclass(frozen=True)
class GenerationDatasetRow:
    text: str
    timestamp: str
    reference_queries: tuple[str, ...]
    reference_criteria: tuple[ReferenceCriterion, ...]
    item_id: str = ""


def load_generation_dataset(path: str | Path) -> list[GenerationDatasetRow]:
    """Read reference rows: query text, reference queries, and criteria."""
    rows: list[GenerationDatasetRow] = []
    for line_no, data in _read_jsonl(path):
        if not isinstance(data, dict):
            raise MetricError(f"{path} line {line_no}: row must be an object")
        try:
            text = data["query"]
            references = data["reference_queries"]
            criteria = data["reference_criteria"]
        except KeyError as exc:
            raise MetricError(f"{path} line {line_no}: missing field {exc.args[0]!r}") from None
        if not (isinstance(references, list) and references and all(isinstance(q, str) for q in references)):
            raise MetricError(f"{path} line {line_no}: reference_queries must be a non-empty string list")
        if not (isinstance(criteria, list) and criteria):
            raise MetricError(f"{path} line {line_no}: reference_criteria must be a non-empty list")
        try:
            parsed_criteria = tuple(
                ReferenceCriterion(name=c["name"], description=c["description"]) for c in criteria
            )
        except (TypeError, KeyError, InvariantError) as exc:
            raise MetricError(f"{path} line {line_no}: bad reference criterion: {exc}") from None
        timestamp = data.get("timestamp", "1970-01-01T00:00:00+00:00")
        parse_instant(timestamp)
        rows.append(
            GenerationDatasetRow(
                text=text,
                timestamp=timestamp,
                reference_queries=tuple(references),
                reference_criteria=parsed_criteria,
                item_id=str(data.get("id", line_no)),
            )
        )
    if not rows:
        raise MetricError(f"{path}: no dataset rows")
    return rows


def load_generation_outputs(path: str | Path) -> list[QueryPlan]:
    """Read generated plans, one canonical plan object per line."""
    plans: list[QueryPlan] = []
    for line_no, data in _read_jsonl(path):
        try:
            plans.append(canonical_parse(QueryPlan, json.dumps(data)))
        except Exception as exc:
            raise MetricError(f"{path} line {line_no}: bad plan: {exc}") from None
    if not plans:
        raise MetricError(f"{path}: no plans")
    return plans


def generation_items_from_files(
    dataset_path: str | Path, outputs_path: str | Path
) -> list[GenerationEvalItem]:
    """Pair dataset rows with generated plans positionally."""
    dataset = load_generation_dataset(dataset_path)
    outputs = load_generation_outputs(outputs_path)
    if len(dataset) != len(outputs):
        raise MetricError(
            f"dataset has {len(dataset)} rows but outputs file has {len(outputs)} plans"
        )
    return [
        GenerationEvalItem(
            generated=plan,
            reference_queries=row.reference_queries,
            reference_criteria=row.reference_criteria,
            item_id=row.item_id,
        )
        for row, plan in zip(dataset, outputs)
    ]


def _verdict_from_row(data: object, path, line_no: int) -> tuple[AssessmentVerdict, str]:
    if isinstance(data, str):
        raw, item_id = data, str(line_no)
    elif isinstance(data, dict) and "verdict" in data:
        raw, item_id = data["verdict"], str(data.get("id", line_no))
    else:
        raise MetricError(
            f"{path} line {line_no}: expected a verdict string or an object with a 'verdict' field"
        )
    try:
        return AssessmentVerdict(raw), item_id
    except ValueError:
        legal = ", ".join(v.value for v in AssessmentVerdict)
        raise MetricError(f"{path} line {line_no}: unknown verdict {raw!r}; expected: {legal}") from None


def matching_items_from_files(
    gold_path: str | Path, predicted_path: str | Path
) -> list[MatchingEvalItem]:
    """Pair gold and predicted verdict files positionally."""
    gold_rows = _read_jsonl(gold_path)
    predicted_rows = _read_jsonl(predicted_path)
    if len(gold_rows) != len(predicted_rows):
        raise MetricError(
            f"gold file has {len(gold_rows)} rows but predictions file has {len(predicted_rows)}"
        )
    if not gold_rows:
        raise MetricError(f"{gold_path}: no rows")
    items = []
    for (gold_line, gold_data), (pred_line, pred_data) in zip(gold_rows, predicted_rows):
        gold, item_id = _verdict_from_row(gold_data, gold_path, gold_line)
        predicted, _ = _verdict_from_row(pred_data, predicted_path, pred_line)
        items.append(MatchingEvalItem(gold=gold, predicted=predicted, item_id=item_id))
    return items
