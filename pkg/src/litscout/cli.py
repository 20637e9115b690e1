"""Command line front end.

Subcommands cover the full pipeline: plan generation, deep search with
validated verdicts, quick keyword search, corpus ingestion, evaluation
reports (with figures), reward/advantage computation, and the HTTP
service.  Report paths receive machine-readable output files next to the
rendered figures.
"""

from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from litscout import __version__
from litscout.core.serialize import canonical_serialize, parse_instant
from litscout.core.types import PaperClassification, ResearchQuery
from litscout.errors import LitScoutError
from litscout.evalkit.training import group_advantages
from litscout.llmgate import BackendConfig, create_backend
from litscout.planner import generate_plan
from litscout.retrieval import RetrievalLimits, deep_retrieve, ingest_corpus, quick_search
from litscout.validator import ScoringConfig, validate_candidates


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _backend_options(command):
    command = click.option(
        "--mock-script",
        envvar="LITSCOUT_MOCK_SCRIPT",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Answer model calls from this digest-keyed script file.",
    )(command)
    command = click.option(
        "--backend-url",
        envvar="LITSCOUT_BACKEND_URL",
        default=None,
        help="Chat-completions endpoint for a remote backend.",
    )(command)
    command = click.option(
        "--model",
        envvar="LITSCOUT_MODEL",
        default="default",
        show_default=True,
        help="Model name sent to the backend.",
    )(command)
    return command


def _make_backend(mock_script: str | None, backend_url: str | None, model: str):
    import os

    if mock_script:
        return create_backend(BackendConfig(kind="mock", model_name=model, endpoint=mock_script))
    if backend_url:
        return create_backend(
            BackendConfig(kind="remote", model_name=model, endpoint=backend_url),
            api_key=os.environ.get("LITSCOUT_API_KEY"),
        )
    raise _fail("no backend configured: pass --mock-script or --backend-url")


def _parse_timestamp(value: str | None) -> datetime:
    if value is None:
        return datetime.now(timezone.utc)
    try:
        return parse_instant(value)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None


def _load_corpus(corpus: str | None):
    if not corpus:
        raise _fail("no corpus configured: pass --corpus or set LITSCOUT_CORPUS")
    try:
        index, _stats = ingest_corpus(corpus)
    except (OSError, LitScoutError) as exc:
        raise _fail(str(exc)) from None
    return index


@click.group()
@click.version_option(version=__version__, prog_name="litscout")
def main() -> None:
    """Literature deep search: plan, retrieve, validate, evaluate."""


@main.command("plan")
@click.argument("query_text")
@click.option("--timestamp", default=None, help="Query timestamp (ISO-8601); defaults to now.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the plan here.")
@_backend_options
def plan_command(query_text: str, timestamp: str | None, out: str | None,
                 mock_script: str | None, backend_url: str | None, model: str) -> None:
    """Generate search queries and screening criteria for QUERY_TEXT."""
    backend = _make_backend(mock_script, backend_url, model)
    query = ResearchQuery(text=query_text, timestamp=_parse_timestamp(timestamp))
    try:
        plan = generate_plan(query, backend)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None
    text = canonical_serialize(plan)
    click.echo(text)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")


@main.command("search")
@click.argument("query_text")
@click.option("--corpus", envvar="LITSCOUT_CORPUS", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSONL corpus file to search.")
@click.option("--max", "max_candidates", type=click.IntRange(min=1), default=100,
              show_default=True, help="Candidate cap across all queries.")
@click.option("--per-query-cap", type=click.IntRange(min=1), default=50, show_default=True,
              help="Candidate cap per search query.")
@click.option("--concurrency", type=click.IntRange(min=1), default=4, show_default=True,
              help="Parallel validation calls.")
@click.option("--timestamp", default=None, help="Query timestamp (ISO-8601); defaults to now.")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write verdicts.jsonl and figures here.")
@_backend_options
def search_command(query_text: str, corpus: str | None, max_candidates: int, per_query_cap: int,
                   concurrency: int, timestamp: str | None, report_dir: str | None,
                   mock_script: str | None, backend_url: str | None, model: str) -> None:
    """Deep search: plan QUERY_TEXT, retrieve candidates, validate them."""
    backend = _make_backend(mock_script, backend_url, model)
    index = _load_corpus(corpus)
    query = ResearchQuery(text=query_text, timestamp=_parse_timestamp(timestamp))
    limits = RetrievalLimits(
        max_candidates=max_candidates,
        per_query_cap=min(per_query_cap, max_candidates),
    )
    scoring = ScoringConfig(concurrency_limit=concurrency)
    try:
        plan = generate_plan(query, backend)
        retrieval = deep_retrieve(index, plan, limits)
        verdicts = validate_candidates(query, plan, list(retrieval.papers), backend, scoring)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None

    counts = {c: 0 for c in PaperClassification}
    for verdict in verdicts:
        counts[verdict.classification] += 1
        click.echo(f"{verdict.classification.value}\t{verdict.score:.6f}\t{verdict.paper_id}")
    click.echo(
        f"candidates={len(verdicts)} perfect={counts[PaperClassification.PERFECT]} "
        f"partial={counts[PaperClassification.PARTIAL]} no={counts[PaperClassification.NO]}"
        + (" degraded" if retrieval.degraded else "")
    )
    if report_dir:
        from litscout.evalkit.figures import save_run_figures

        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "verdicts.jsonl", "w", encoding="utf-8") as handle:
            for verdict in verdicts:
                handle.write(canonical_serialize(verdict) + "\n")
        for path in save_run_figures(verdicts, out):
            click.echo(f"figure: {path}", err=True)


@main.command("quick")
@click.argument("query_text")
@click.option("-k", "--top-k", type=click.IntRange(min=1), default=10, show_default=True,
              help="Number of hits.")
@click.option("--corpus", envvar="LITSCOUT_CORPUS", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSONL corpus file to search.")
def quick_command(query_text: str, top_k: int, corpus: str | None) -> None:
    """BM25 keyword search over the corpus."""
    index = _load_corpus(corpus)
    for hit in quick_search(index, query_text, top_k):
        click.echo(f"{hit.score:.4f}\t{hit.paper.paper_id}\t{hit.paper.title}")


@main.group("corpus")
def corpus_group() -> None:
    """Corpus file utilities."""


@corpus_group.command("ingest")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def ingest_command(path: str) -> None:
    """Validate and index a JSONL corpus file, reporting ingest stats."""
    try:
        _index, stats = ingest_corpus(path)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None
    click.echo(f"documents: {stats.documents}")
    click.echo(f"tokens: {stats.tokens}")
    click.echo(f"rejected_lines: {stats.rejected_lines}")
    for line_no, reason in stats.rejected:
        click.echo(f"  line {line_no}: {reason}")


@main.group("eval")
def eval_group() -> None:
    """Evaluation reports."""


@eval_group.command("gen")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Reference rows (JSONL).")
@click.option("--outputs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Generated plans (JSONL, canonical plan objects).")
@click.option("--label", default="generated", show_default=True, help="Row label in the table.")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write report.tsv and figures here.")
def eval_gen_command(dataset: str, outputs: str, label: str, report_dir: str | None) -> None:
    """Score generated plans against reference annotations."""
    from litscout.evalkit.reports import (
        evaluate_generation,
        generation_items_from_files,
        generation_table,
        generation_tsv,
    )

    try:
        items = generation_items_from_files(dataset, outputs)
        report = evaluate_generation(items)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None
    click.echo(generation_table(report, label))
    if report_dir:
        from litscout.evalkit.figures import save_generation_figures

        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.tsv").write_text(generation_tsv(report, label), encoding="utf-8")
        for path in save_generation_figures(report, out):
            click.echo(f"figure: {path}", err=True)


@eval_group.command("match")
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Gold verdicts (JSONL).")
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Predicted verdicts (JSONL).")
@click.option("--label", default="predicted", show_default=True, help="Row label in the table.")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write report.tsv and figures here.")
def eval_match_command(gold: str, pred: str, label: str, report_dir: str | None) -> None:
    """Verdict confusion matrix with per-category and overall accuracy."""
    from litscout.evalkit.reports import (
        evaluate_matching,
        matching_items_from_files,
        matching_table,
        matching_tsv,
    )

    try:
        items = matching_items_from_files(gold, pred)
        report = evaluate_matching(items)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None
    click.echo(matching_table(report, label))
    if report_dir:
        from litscout.evalkit.figures import save_matching_figures

        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.tsv").write_text(matching_tsv(report, label), encoding="utf-8")
        for path in save_matching_figures(report, out):
            click.echo(f"figure: {path}", err=True)


@main.command("reward")
@click.option("--group", "group_text", required=True,
              help='Comma-separated rewards for one rollout group, e.g. "1,0,0,1".')
def reward_command(group_text: str) -> None:
    """Standardize a reward group into advantages."""
    try:
        rewards = [float(part) for part in group_text.split(",") if part.strip() != ""]
    except ValueError:
        raise _fail(f"rewards must be numbers, got {group_text!r}") from None
    try:
        advantages = group_advantages(rewards)
    except LitScoutError as exc:
        raise _fail(str(exc)) from None
    click.echo(",".join(f"{value:g}" for value in advantages))


@main.command("serve")
@click.option("--port", envvar="LITSCOUT_PORT", type=click.IntRange(min=1, max=65535),
              default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_command(port: int, host: str) -> None:
    """Start the HTTP service (configured through LITSCOUT_* variables)."""
    import uvicorn

    from litscout.orchestrator.service import app_from_env

    uvicorn.run(app_from_env(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
