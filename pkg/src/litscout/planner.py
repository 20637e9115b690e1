"""Query planning: prompt construction, plan parsing, and plan edits.

The planner asks the backend to decompose a research query into Boolean
search queries plus weighted screening criteria, validates the structured
response, and supports user edits that always leave the plan in a valid
state with renormalized weights and a bumped version.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Sequence, Union

from litscout.boolquery import BooleanQueryAst, parse_boolean_query, render_query
from litscout.core.types import (
    CriteriaSet,
    Criterion,
    CriterionKind,
    QueryPlan,
    ResearchQuery,
)
from litscout.errors import (
    EditError,
    PlanValidationError,
    QueryParseError,
)
from litscout.llmgate import (
    Backend,
    GenerationResult,
    PromptBundle,
    generate_with_schema,
    load_template,
    render_template,
)

# Generated weights may miss an exact sum of one by at most this much
# before the plan is rejected instead of renormalized.
WEIGHT_SUM_SLACK = 0.05

_KIND_ALIASES = {
    "task": CriterionKind.TASK,
    "method": CriterionKind.METHOD,
    "methodology": CriterionKind.METHOD,
    "approach": CriterionKind.METHOD,
    "dataset": CriterionKind.DATASET,
    "data": CriterionKind.DATASET,
    "metric": CriterionKind.METRIC,
    "metrics": CriterionKind.METRIC,
    "measure": CriterionKind.METRIC,
}


def criterion_kind_from_label(label: str) -> CriterionKind:
    """Map a free-form type label onto a criterion kind, defaulting to other."""
    return _KIND_ALIASES.get(label.strip().lower(), CriterionKind.OTHER)


def build_plan_prompt(query: ResearchQuery) -> PromptBundle:
    """Prompt asking the backend to plan searches and criteria for a query."""
    system = load_template("criteria_system.txt")
    user = render_template(
        load_template("criteria_user.txt"),
        {"timestamp": query.timestamp.isoformat(), "user_query": query.text},
    )
    user = f"{user}\n\n{load_template('criteria_output_format.txt')}"
    return PromptBundle(system=system, user=user)


def _renormalize(weights: Sequence[float]) -> list[float]:
    total = sum(weights)
    return [w / total for w in weights]


def parse_plan(value: Any, source_query: ResearchQuery, *, version: int = 1) -> QueryPlan:
    """Validate a structured planning response and build the QueryPlan.

    Criterion ids are assigned positionally (c1, c2, ...).  Weight sums
    within ``WEIGHT_SUM_SLACK`` of one are renormalized; anything further
    off is rejected.  All violations are collected before raising.
    """
    violations: list[str] = []
    if not isinstance(value, dict):
        raise PlanValidationError(["response must be a JSON object"])

    queries: list[BooleanQueryAst] = []
    raw_queries = value.get("search_queries")
    if not isinstance(raw_queries, list):
        violations.append('"search_queries" must be a list of strings')
    else:
        if not 2 <= len(raw_queries) <= 4:
            violations.append(f'"search_queries" must hold 2-4 entries, got {len(raw_queries)}')
        for i, raw in enumerate(raw_queries, start=1):
            if not isinstance(raw, str):
                violations.append(f"search query {i} must be a string")
                continue
            try:
                queries.append(parse_boolean_query(raw))
            except QueryParseError as exc:
                violations.append(f"search query {i} does not parse: {exc}")

    criteria_specs: list[tuple[CriterionKind, str, str, float]] = []
    raw_criteria = value.get("criteria")
    if not isinstance(raw_criteria, list):
        violations.append('"criteria" must be a list of objects')
    else:
        if not 1 <= len(raw_criteria) <= 4:
            violations.append(f'"criteria" must hold 1-4 entries, got {len(raw_criteria)}')
        for i, raw in enumerate(raw_criteria, start=1):
            if not isinstance(raw, dict):
                violations.append(f"criterion {i} must be an object")
                continue
            label = raw.get("type")
            name = raw.get("name")
            description = raw.get("description")
            weight = raw.get("weight")
            ok = True
            if not isinstance(label, str):
                violations.append(f'criterion {i}: "type" must be a string')
                ok = False
            if not (isinstance(name, str) and name.strip()):
                violations.append(f'criterion {i}: "name" must be a non-empty string')
                ok = False
            if not (isinstance(description, str) and description.strip()):
                violations.append(f'criterion {i}: "description" must be a non-empty string')
                ok = False
            if not (isinstance(weight, (int, float)) and not isinstance(weight, bool) and 0.0 < float(weight) <= 1.0):
                violations.append(f'criterion {i}: "weight" must be a number in (0, 1]')
                ok = False
            if ok:
                criteria_specs.append(
                    (criterion_kind_from_label(label), name, description, float(weight))
                )
        if isinstance(raw_criteria, list) and len(criteria_specs) == len(raw_criteria) and criteria_specs:
            total = sum(spec[3] for spec in criteria_specs)
            if abs(total - 1.0) > WEIGHT_SUM_SLACK:
                violations.append(
                    f"criterion weights sum to {total:.6g}, more than {WEIGHT_SUM_SLACK} away from 1"
                )

    if violations:
        raise PlanValidationError(violations)

    weights = _renormalize([spec[3] for spec in criteria_specs])
    criteria = CriteriaSet(
        criteria=tuple(
            Criterion(id=f"c{i + 1}", kind=kind, name=name, description=description, weight=w)
            for i, ((kind, name, description, _), w) in enumerate(zip(criteria_specs, weights))
        )
    )
    return QueryPlan(
        search_queries=tuple(queries),
        criteria=criteria,
        source_query=source_query,
        version=version,
    )


def generate_plan(query: ResearchQuery, backend: Backend) -> QueryPlan:
    """Generate and validate a plan for a research query."""
    bundle = build_plan_prompt(query)
    result: GenerationResult = generate_with_schema(
        bundle, backend, lambda value: parse_plan(value, query)
    )
    return result.value


# --- plan edits -----------------------------------------------------------


@dataclass(frozen=True)
class AddCriterion:
    kind: CriterionKind
    name: str
    description: str
    weight: float
    criterion_id: str | None = None


@dataclass(frozen=True)
class RemoveCriterion:
    criterion_id: str


@dataclass(frozen=True)
class ReplaceCriterion:
    criterion_id: str
    kind: CriterionKind
    name: str
    description: str
    weight: float


@dataclass(frozen=True)
class SetWeight:
    criterion_id: str
    weight: float


@dataclass(frozen=True)
class AddQuery:
    query: str


@dataclass(frozen=True)
class RemoveQuery:
    index: int


@dataclass(frozen=True)
class ReplaceQuery:
    index: int
    query: str


EditCommand = Union[
    AddCriterion, RemoveCriterion, ReplaceCriterion, SetWeight,
    AddQuery, RemoveQuery, ReplaceQuery,
]

_EDIT_OPS = {
    "add_criterion": AddCriterion,
    "remove_criterion": RemoveCriterion,
    "replace_criterion": ReplaceCriterion,
    "set_weight": SetWeight,
    "add_query": AddQuery,
    "remove_query": RemoveQuery,
    "replace_query": ReplaceQuery,
}


def edit_from_dict(data: dict) -> EditCommand:
    """Decode one edit command from its wire form."""
    if not isinstance(data, dict):
        raise EditError("an edit must be an object")
    op = data.get("op")
    if op not in _EDIT_OPS:
        raise EditError(f"unknown edit op {op!r}; expected one of: {', '.join(sorted(_EDIT_OPS))}")
    fields = {k: v for k, v in data.items() if k != "op"}
    if "kind" in fields:
        try:
            fields["kind"] = CriterionKind(fields["kind"])
        except ValueError:
            raise EditError(f"unknown criterion kind {fields['kind']!r}") from None
    try:
        return _EDIT_OPS[op](**fields)
    except TypeError as exc:
        raise EditError(f"bad fields for {op}: {exc}") from None


def edit_to_dict(edit: EditCommand) -> dict:
    """Encode one edit command to its wire form."""
    for op, cls in _EDIT_OPS.items():
        if isinstance(edit, cls):
            data = {"op": op}
            for key, value in edit.__dict__.items():
                if value is None:
                    continue
                data[key] = value.value if isinstance(value, CriterionKind) else value
            return data
    raise EditError(f"not an edit command: {edit!r}")


def _positive_weight(weight: float, context: str) -> float:
    if not (isinstance(weight, (int, float)) and not isinstance(weight, bool) and float(weight) > 0):
        raise EditError(f"{context}: weight must be a positive number")
    return float(weight)


def apply_edits(plan: QueryPlan, edits: Sequence[EditCommand]) -> QueryPlan:
    """Apply edit commands to a plan, returning a new, valid plan.

    Weights are renormalized to sum to one while preserving their ratios,
    and the version is incremented once per call.  The input plan is never
    mutated; any invalid edit raises :class:`EditError` and leaves nothing
    half-applied.
    """
    queries: list[BooleanQueryAst] = list(plan.search_queries)
    rows: list[dict] = [
        {"id": c.id, "kind": c.kind, "name": c.name, "description": c.description, "weight": c.weight}
        for c in plan.criteria
    ]

    def row_index(criterion_id: str) -> int:
        for i, row in enumerate(rows):
            if row["id"] == criterion_id:
                return i
        raise EditError(f"no criterion with id {criterion_id!r}")

    def parse_edit_query(text: str, context: str) -> BooleanQueryAst:
        if not isinstance(text, str):
            raise EditError(f"{context}: query must be a string")
        try:
            return parse_boolean_query(text)
        except QueryParseError as exc:
            raise EditError(f"{context}: {exc}") from None

    for edit in edits:
        if isinstance(edit, AddCriterion):
            new_id = edit.criterion_id
            if new_id is None:
                taken = {row["id"] for row in rows}
                n = len(rows) + 1
                while f"c{n}" in taken:
                    n += 1
                new_id = f"c{n}"
            elif any(row["id"] == new_id for row in rows):
                raise EditError(f"criterion id {new_id!r} already exists")
            rows.append(
                {
                    "id": new_id,
                    "kind": edit.kind,
                    "name": edit.name,
                    "description": edit.description,
                    "weight": _positive_weight(edit.weight, "add_criterion"),
                }
            )
        elif isinstance(edit, RemoveCriterion):
            del rows[row_index(edit.criterion_id)]
        elif isinstance(edit, ReplaceCriterion):
            i = row_index(edit.criterion_id)
            rows[i] = {
                "id": edit.criterion_id,
                "kind": edit.kind,
                "name": edit.name,
                "description": edit.description,
                "weight": _positive_weight(edit.weight, "replace_criterion"),
            }
        elif isinstance(edit, SetWeight):
            rows[row_index(edit.criterion_id)]["weight"] = _positive_weight(edit.weight, "set_weight")
        elif isinstance(edit, AddQuery):
            queries.append(parse_edit_query(edit.query, "add_query"))
        elif isinstance(edit, RemoveQuery):
            if not 0 <= edit.index < len(queries):
                raise EditError(f"remove_query: no query at index {edit.index}")
            del queries[edit.index]
        elif isinstance(edit, ReplaceQuery):
            if not 0 <= edit.index < len(queries):
                raise EditError(f"replace_query: no query at index {edit.index}")
            queries[edit.index] = parse_edit_query(edit.query, "replace_query")
        else:
            raise EditError(f"not an edit command: {edit!r}")

    if not 1 <= len(rows) <= 4:
        raise EditError(f"edits must leave 1-4 criteria, would leave {len(rows)}")
    if not 2 <= len(queries) <= 4:
        raise EditError(f"edits must leave 2-4 search queries, would leave {len(queries)}")

    weights = _renormalize([row["weight"] for row in rows])
    criteria = CriteriaSet(
        criteria=tuple(
            Criterion(id=row["id"], kind=row["kind"], name=row["name"],
                      description=row["description"], weight=w)
            for row, w in zip(rows, weights)
        )
    )
    return replace(
        plan,
        search_queries=tuple(queries),
        criteria=criteria,
        version=plan.version + 1,
    )


def renormalized_weights(weights: Sequence[float]) -> list[float]:
    """Ratio-preserving renormalization to a unit sum.

    Exposed so that user interfaces can preview the exact weights the
    server will produce for a pending edit.
    """
    if not weights:
        raise EditError("at least one weight is required")
    for w in weights:
        if not (isinstance(w, (int, float)) and not isinstance(w, bool) and float(w) > 0):
            raise EditError("weights must be positive numbers")
    return _renormalize([float(w) for w in weights])


def plan_summary(plan: QueryPlan) -> dict:
    """Human-oriented dict view of a plan (queries rendered canonically)."""
    return {
        "version": plan.version,
        "search_queries": [render_query(q) for q in plan.search_queries],
        "criteria": [
            {
                "id": c.id,
                "kind": c.kind.value,
                "name": c.name,
                "description": c.description,
                "weight": c.weight,
            }
            for c in plan.criteria
        ],
    }
