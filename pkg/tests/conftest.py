"""Shared fixtures: a golden corpus, scripted mock backends, helpers."""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from litscout.core.serialize import parse_instant
from litscout.core.types import ResearchQuery
from litscout.llmgate import MockBackend
from litscout.planner import build_plan_prompt, parse_plan
from litscout.retrieval import CorpusIndex, ingest_corpus
from litscout.validator import build_validation_prompt

GOLDEN_TS = "2026-01-15T09:30:00+00:00"
GOLDEN_QUERY = "graph neural networks for molecular property prediction"

# Verdict pairs (c1, c2) per paper.  Weights 0.6/0.4 and theta_no 0.35 give
# the partition Perfect 3 / Partial 5 / No 22.
GOLDEN_VERDICTS: dict[str, tuple[str, str]] = {
    "g01": ("support", "support"),
    "g02": ("support", "support"),
    "g03": ("support", "support"),
    "g04": ("support", "reject"),
    "g05": ("support", "somewhat_support"),
    "g06": ("somewhat_support", "support"),
    "g07": ("somewhat_support", "somewhat_support"),
    "g08": ("insufficient_information", "support"),
    "g09": ("reject", "reject"),
    "g10": ("reject", "insufficient_information"),
    "g11": ("insufficient_information", "insufficient_information"),
    "g12": ("insufficient_information", "reject"),
    "g13": ("reject", "somewhat_support"),
    "g14": ("reject", "reject"),
    "g15": ("reject", "reject"),
    "g16": ("reject", "insufficient_information"),
    "g17": ("reject", "reject"),
    "g18": ("insufficient_information", "reject"),
    "g19": ("reject", "reject"),
    "g20": ("reject", "reject"),
    "g21": ("reject", "somewhat_support"),
    "g22": ("reject", "reject"),
    "g23": ("reject", "reject"),
    "g24": ("insufficient_information", "insufficient_information"),
    "g25": ("reject", "reject"),
    "g26": ("reject", "reject"),
    "g27": ("reject", "insufficient_information"),
    "g28": ("reject", "reject"),
    "g29": ("reject", "reject"),
    "g30": ("reject", "reject"),
}

GOLDEN_PLAN_RESPONSE = json.dumps(
    {
        "search_queries": ['"graph neural network"', "molecular AND property"],
        "criteria": [
            {
                "type": "task",
                "name": "molecular property prediction",
                "description": "The paper targets molecular property prediction.",
                "weight": 0.6,
            },
            {
                "type": "method",
                "name": "graph neural network",
                "description": "The paper uses a graph neural network model.",
                "weight": 0.4,
            },
        ],
    }
)


def golden_paper_rows() -> list[dict]:
    rows = []
    for i in range(1, 31):
        extra = " It includes molecular property prediction benchmarks." if i % 3 == 0 else ""
        rows.append(
            {
                "paper_id": f"g{i:02d}",
                "title": f"Graph Neural Network Study {i:02d}",
                "abstract": f"We analyze the graph neural network family, instance {i:02d}.{extra}",
                "authors": [f"Author {i:02d}"],
                "venue": "TestConf",
                "venue_type": "conference",
                "publication_date": f"2024-01-{(i % 28) + 1:02d}",
                "citation_count": 2000 - 13 * i,
            }
        )
    return rows


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    return path


def assessment_response(
    pairs: list[tuple[str, str]], *, summary: str, evidence: dict[str, list[dict]] | None = None
) -> str:
    entries = []
    for criterion_id, verdict in pairs:
        entry = {
            "criterion_id": criterion_id,
            "assessment": verdict,
            "explanation": f"criterion {criterion_id} assessed as {verdict}",
            "evidence": (evidence or {}).get(criterion_id, []),
        }
        entries.append(entry)
    return json.dumps({"criteria_assessment": entries, "summary": summary})


@dataclass
class GoldenSetup:
    corpus_path: Path
    script_path: Path
    store_dir: Path
    query: ResearchQuery
    index: CorpusIndex
    script: dict[str, str]

    def backend(self) -> MockBackend:
        return MockBackend(self.script)


@pytest.fixture(scope="session")
def golden(tmp_path_factory) -> GoldenSetup:
    root = tmp_path_factory.mktemp("golden")
    corpus_path = write_jsonl(root / "corpus.jsonl", golden_paper_rows())
    query = ResearchQuery(text=GOLDEN_QUERY, timestamp=parse_instant(GOLDEN_TS))

    script: dict[str, str] = {}
    plan_bundle = build_plan_prompt(query)
    script[plan_bundle.digest()] = GOLDEN_PLAN_RESPONSE
    plan = parse_plan(json.loads(GOLDEN_PLAN_RESPONSE), query)

    index, stats = ingest_corpus(corpus_path)
    assert stats.documents == 30 and not stats.rejected
    for paper in index.documents:
        v1, v2 = GOLDEN_VERDICTS[paper.paper_id]
        evidence = {"c2": [{"source": "title", "text": "Graph Neural Network"}]}
        response = assessment_response(
            [("c1", v1), ("c2", v2)],
            summary=f"scripted summary for {paper.paper_id}",
            evidence=evidence,
        )
        bundle = build_validation_prompt(query, plan.criteria, paper)
        script[bundle.digest()] = response

    script_path = root / "script.json"
    script_path.write_text(json.dumps(script), encoding="utf-8")
    store_dir = root / "store"
    return GoldenSetup(
        corpus_path=corpus_path,
        script_path=script_path,
        store_dir=store_dir,
        query=query,
        index=index,
        script=script,
    )


@contextlib.contextmanager
def acceptance_line(name: str):
    """Print one PASS/FAIL line per acceptance criterion."""
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")
