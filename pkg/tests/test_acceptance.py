"""Acceptance gate.

One test per shipped guarantee.  Each prints a single
``[ACCEPTANCE] <name>: PASS`` or ``FAIL`` line (run with ``-s`` to see
them inline); everything here runs offline against mock backends and
in-memory corpora, with outbound sockets disabled for the duration.
"""

import json
import math
import random
import socket
import sys
import time
from datetime import timedelta

import pytest

from conftest import GOLDEN_TS, acceptance_line
from litscout.boolquery import match_tokens, parse_boolean_query, render_query
from litscout.core.serialize import canonical_json, canonical_serialize, from_jsonable, parse_instant
from litscout.core.types import (
    AssessmentVerdict,
    CriteriaSet,
    Criterion,
    CriterionAssessment,
    CriterionKind,
    PaperClassification,
    PaperMetadata,
    QueryPlan,
    ResearchQuery,
)
from litscout.errors import PlanValidationError, QueryParseError, SessionLogError
from litscout.evalkit.metrics import bleu, rouge_l, rouge_n, tokenize
from litscout.evalkit.reports import MatchingEvalItem, VERDICT_ORDER, evaluate_matching
from litscout.evalkit.training import group_advantages, reward
from litscout.llmgate import MockBackend
from litscout.orchestrator import Orchestrator, RunStatus, SessionStatus, SessionStore
from litscout.orchestrator.sessions import RunRecord, SearchSession, session_to_jsonable
from litscout.planner import generate_plan, parse_plan
from litscout.retrieval import CorpusIndex, RetrievalLimits, bm25_scores, deep_retrieve, quick_search
from litscout.validator import ScoringConfig, classify, score_paper

from test_boolquery import _oracle_match, _random_ast
from test_metrics import oracle_bleu, oracle_rouge_l, oracle_rouge_n
from test_retrieval import make_plan as retrieval_plan
from test_retrieval import oracle_bm25, oracle_match, random_corpus, small_index

T0 = parse_instant("2026-01-15T10:00:00+00:00")


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Fail fast if anything here tries to open an outbound connection."""

    def deny(*args, **kwargs):
        raise AssertionError("network access attempted during acceptance tests")

    monkeypatch.setattr(socket.socket, "connect", deny)
    monkeypatch.setattr(socket, "create_connection", deny)
    yield


# --- 1: generation metrics equal independent oracles -------------------------


def test_metric_oracle_equivalence():
    with acceptance_line("metric-oracle equivalence (200 pairs, 1e-9, <5s)"):
        rng = random.Random(20260815)
        vocab = list("abcdefghij")
        started = time.perf_counter()
        for _ in range(200):
            cand = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
            ref = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
            cand_text, ref_text = " ".join(cand), " ".join(ref)
            for n in (1, 2):
                got = rouge_n(cand_text, ref_text, n)
                want = oracle_rouge_n(cand, ref, n)
                assert abs(got.precision - want[0]) <= 1e-9
                assert abs(got.recall - want[1]) <= 1e-9
                assert abs(got.f1 - want[2]) <= 1e-9
            got_l = rouge_l(cand_text, ref_text)
            want_l = oracle_rouge_l(cand, ref)
            assert abs(got_l.precision - want_l[0]) <= 1e-9
            assert abs(got_l.recall - want_l[1]) <= 1e-9
            assert abs(got_l.f1 - want_l[2]) <= 1e-9
            refs = [ref, [rng.choice(vocab) for _ in range(rng.randint(1, 12))]]
            got_b = bleu(cand_text, [" ".join(r) for r in refs])
            assert abs(got_b - oracle_bleu(cand, refs)) <= 1e-9
        assert time.perf_counter() - started < 5.0


# --- 2: hand-worked metric fixtures ------------------------------------------


def test_metric_hand_fixtures():
    with acceptance_line("hand-worked metric fixtures (cat sat/cat ran)"):
        assert rouge_n("the cat sat", "the cat ran", 1).f1 == 2 / 3
        assert rouge_n("the cat sat", "the cat ran", 2).f1 == 1 / 2
        assert rouge_l("the cat sat", "the cat ran").f1 == 2 / 3


# --- 3: matching-report arithmetic -------------------------------------------


def test_matching_report_arithmetic():
    with acceptance_line("matching-report arithmetic (10-item fixture + weighted identity)"):
        V = AssessmentVerdict
        pairs = [
            (V.SUPPORT, V.SUPPORT),
            (V.SUPPORT, V.SUPPORT),
            (V.SUPPORT, V.SUPPORT),
            (V.SUPPORT, V.REJECT),
            (V.SOMEWHAT_SUPPORT, V.SOMEWHAT_SUPPORT),
            (V.SOMEWHAT_SUPPORT, V.SUPPORT),
            (V.INSUFFICIENT_INFORMATION, V.INSUFFICIENT_INFORMATION),
            (V.INSUFFICIENT_INFORMATION, V.INSUFFICIENT_INFORMATION),
            (V.REJECT, V.REJECT),
            (V.REJECT, V.INSUFFICIENT_INFORMATION),
        ]
        report = evaluate_matching([MatchingEvalItem(gold=g, predicted=p) for g, p in pairs])
        assert report.items == 10
        # Axis order: insufficient_information, reject, somewhat_support, support.
        assert report.confusion == (
            (2, 0, 0, 0),
            (1, 1, 0, 0),
            (0, 0, 1, 1),
            (0, 1, 0, 3),
        )
        assert report.gold_counts == {
            V.INSUFFICIENT_INFORMATION: 2,
            V.REJECT: 2,
            V.SOMEWHAT_SUPPORT: 2,
            V.SUPPORT: 4,
        }
        assert report.per_category_accuracy[V.SUPPORT] == 3 / 4
        assert report.per_category_accuracy[V.SOMEWHAT_SUPPORT] == 1 / 2
        assert report.per_category_accuracy[V.INSUFFICIENT_INFORMATION] == 1.0
        assert report.per_category_accuracy[V.REJECT] == 1 / 2
        assert report.overall_accuracy == 7 / 10

        rng = random.Random(77)
        verdicts = list(AssessmentVerdict)
        for _ in range(100):
            items = [
                MatchingEvalItem(gold=rng.choice(verdicts), predicted=rng.choice(verdicts))
                for _ in range(rng.randint(1, 40))
            ]
            rep = evaluate_matching(items)
            weighted = sum(
                rep.gold_counts[v] * rep.per_category_accuracy[v] for v in VERDICT_ORDER
            ) / rep.items
            assert abs(rep.overall_accuracy - weighted) <= 1e-12


# --- 4: reward and advantage suite -------------------------------------------


def test_reward_and_advantages():
    with acceptance_line("reward table + advantage invariants (500 groups)"):
        labels = ["support", "somewhat_support", "insufficient_information", "reject"]
        for predicted in labels:
            for gold in labels:
                assert reward(predicted, gold) == (1 if predicted == gold else 0)
        assert group_advantages([1, 0, 0, 1]) == [1.0, -1.0, -1.0, 1.0]
        rng = random.Random(9001)
        for _ in range(500):
            size = rng.randint(2, 16)
            rewards = [rng.uniform(-3, 3) for _ in range(size)]
            advantages = group_advantages(rewards)
            if max(rewards) == min(rewards):
                assert advantages == [0.0] * size
                continue
            mean = sum(advantages) / size
            var = sum((a - mean) ** 2 for a in advantages) / size
            assert abs(mean) <= 1e-9
            assert abs(math.sqrt(var) - 1.0) <= 1e-9
            scale, shift = rng.uniform(0.1, 10.0), rng.uniform(-5.0, 5.0)
            shifted = group_advantages([scale * r + shift for r in rewards])
            assert all(abs(a - b) <= 1e-9 for a, b in zip(advantages, shifted))
        for size in range(2, 9):
            assert group_advantages([0.7] * size) == [0.0] * size


# --- 5: query plan constraints ------------------------------------------------


WORDS = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]
KINDS = ["task", "method", "dataset", "metric", "other"]


def random_plan_response(rng):
    queries = []
    for _ in range(rng.randint(2, 4)):
        if rng.random() < 0.3:
            queries.append('"' + " ".join(rng.sample(WORDS, 2)) + '"')
        else:
            queries.append(" AND ".join(rng.sample(WORDS, rng.randint(1, 2))))
    count = rng.randint(1, 4)
    raw = [rng.uniform(0.1, 1.0) for _ in range(count)]
    jitter = rng.uniform(-0.015, 0.015)
    if count == 1:
        # A lone criterion carries the whole sum, and weights cap at 1.
        jitter = -abs(jitter)
    scale = (1.0 + jitter) / sum(raw)
    criteria = [
        {
            "type": rng.choice(KINDS),
            "name": f"criterion {i}",
            "description": f"checks aspect {i}",
            "weight": w * scale,
        }
        for i, w in enumerate(raw)
    ]
    return {"search_queries": queries, "criteria": criteria}


def test_plan_constraints():
    with acceptance_line("plan constraints (1000 mock plans + slack + byte round-trip)"):
        rng = random.Random(314)
        for i in range(1000):
            backend = MockBackend({"__default__": json.dumps(random_plan_response(rng))})
            query = ResearchQuery(text=f"topic number {i}", timestamp=T0)
            plan = generate_plan(query, backend)
            assert 2 <= len(plan.search_queries) <= 4
            assert 1 <= len(plan.criteria.criteria) <= 4
            assert abs(sum(c.weight for c in plan.criteria) - 1.0) <= 1e-6

        query = ResearchQuery(text="weight slack checks", timestamp=T0)
        near = [
            {"type": "task", "name": "a", "description": "d", "weight": 0.51},
            {"type": "method", "name": "b", "description": "d", "weight": 0.51},
        ]
        plan = parse_plan({"search_queries": ["alpha", "beta"], "criteria": near}, query)
        assert abs(sum(c.weight for c in plan.criteria) - 1.0) <= 1e-9
        far = [dict(c, weight=0.6) for c in near]
        with pytest.raises(PlanValidationError):
            parse_plan({"search_queries": ["alpha", "beta"], "criteria": far}, query)

        # Three-criterion 0.4/0.3/0.3 plan: canonical text is byte-stable
        # through a parse/serialize round trip.
        response = {
            "search_queries": [
                '"team integration" AND outcomes',
                '"specialist placement" AND "team outcomes"',
                "integration AND wellbeing",
            ],
            "criteria": [
                {"type": "task", "name": "integration", "description": "covers integration", "weight": 0.4},
                {"type": "task", "name": "setting", "description": "covers the setting", "weight": 0.3},
                {"type": "task", "name": "outcome", "description": "covers the outcome", "weight": 0.3},
            ],
        }
        plan = generate_plan(
            ResearchQuery(text="integration outcomes", timestamp=T0),
            MockBackend({"__default__": json.dumps(response)}),
        )
        assert [c.weight for c in plan.criteria] == [0.4, 0.3, 0.3]
        text = canonical_serialize(plan)
        reparsed = from_jsonable(QueryPlan, json.loads(text))
        assert reparsed == plan
        assert canonical_serialize(reparsed).encode() == text.encode()


# --- 6: boolean query parser ---------------------------------------------------


def test_boolean_parser():
    with acceptance_line("boolean parser (1000 round-trips, 200 oracle pairs, 10k fuzz)"):
        rng = random.Random(271828)
        vocab = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
        for _ in range(1000):
            ast = _random_ast(rng, vocab, depth=3)
            assert parse_boolean_query(render_query(ast)) == ast
        for _ in range(200):
            ast = _random_ast(rng, vocab, depth=3)
            tokens = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
            assert match_tokens(ast, tokens) == _oracle_match(ast, tokens)
        alphabet = 'ab ()"ANDORand or\t-'
        for _ in range(10_000):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 24)))
            try:
                ast = parse_boolean_query(text)
            except QueryParseError:
                continue
            assert parse_boolean_query(render_query(ast)) == ast


# --- 7: retrieval ---------------------------------------------------------------


def brute_force_ids(papers, plan):
    docs_tokens = [tokenize(f"{p.title} {p.abstract}") for p in papers]
    expected, seen = [], set()
    for ast in plan.search_queries:
        query_tokens = tokenize(render_query(ast, dialect="plain"))
        scores = oracle_bm25(docs_tokens, query_tokens)
        matched = [i for i in range(len(papers)) if oracle_match(ast, docs_tokens[i])]
        ranked = sorted(
            matched,
            key=lambda i: (
                -scores.get(i, 0.0),
                -(papers[i].citation_count if papers[i].citation_count is not None else -1),
                papers[i].title.lower(),
            ),
        )
        for i in ranked:
            if papers[i].paper_id not in seen:
                seen.add(papers[i].paper_id)
                expected.append(papers[i].paper_id)
    return expected


def test_retrieval():
    with acceptance_line("retrieval (brute force, BM25 hand oracle, 10k-doc quick bench)"):
        rng = random.Random(1851)
        papers = random_corpus(rng, size=50)
        index = CorpusIndex(papers)
        plan = retrieval_plan(['alpha AND (beta OR gamma)', '"delta epsilon" OR zeta'])
        expected = brute_force_ids(papers, plan)
        got = deep_retrieve(index, plan, RetrievalLimits(max_candidates=1000, per_query_cap=1000))
        assert [p.paper_id for p in got.papers] == expected
        capped = deep_retrieve(index, plan, RetrievalLimits(max_candidates=10, per_query_cap=10))
        assert [p.paper_id for p in capped.papers] == expected[:10]

        scores = bm25_scores(small_index(), ["alpha", "alpha", "delta"])
        assert scores[0] == pytest.approx(1.6323589765036133, abs=1e-12)
        assert scores[2] == pytest.approx(0.4413780314110978, abs=1e-12)
        assert 1 not in scores

        vocab = [f"word{i:02d}" for i in range(50)]
        big = [
            PaperMetadata(
                paper_id=f"b{i:05d}",
                title=" ".join(rng.choice(vocab) for _ in range(rng.randint(4, 8))),
                abstract=" ".join(rng.choice(vocab) for _ in range(rng.randint(10, 30))),
                citation_count=rng.randint(0, 500),
            )
            for i in range(10_000)
        ]
        big_index = CorpusIndex(big)
        quick_search(big_index, "word01 word02", 10)  # warm-up
        worst = 0.0
        for _ in range(20):
            query = " ".join(rng.choice(vocab) for _ in range(rng.randint(2, 4)))
            started = time.perf_counter()
            quick_search(big_index, query, 10)
            worst = max(worst, time.perf_counter() - started)
        assert worst < 0.05


# --- 8: end-to-end golden run ----------------------------------------------------


def golden_run(golden, root, concurrency):
    import itertools

    counter = itertools.count(1)
    orch = Orchestrator(
        SessionStore(root),
        MockBackend(golden.script),
        golden.index,
        scoring=ScoringConfig(concurrency_limit=concurrency),
        clock=lambda: T0,
        id_factory=lambda: f"id-{next(counter)}",
    )
    session = orch.create_session(golden.query)
    run = orch.run_search(session.session_id)
    verdict_bytes = b"\n".join(canonical_serialize(v).encode() for v in run.verdicts)
    return run, verdict_bytes


def test_golden_run(golden, tmp_path):
    with acceptance_line("golden run (30 papers: 3/5/22 in <5s, byte-stable, conc 1 vs 4)"):
        started = time.perf_counter()
        run, first_bytes = golden_run(golden, tmp_path / "a", concurrency=4)
        assert time.perf_counter() - started < 5.0
        assert run.status is RunStatus.DONE
        counts = {"Perfect": 0, "Partial": 0, "No": 0}
        for verdict in run.verdicts:
            counts[verdict.classification.value] += 1
        assert counts == {"Perfect": 3, "Partial": 5, "No": 22}

        _, repeat_bytes = golden_run(golden, tmp_path / "b", concurrency=4)
        assert repeat_bytes == first_bytes
        _, serial_bytes = golden_run(golden, tmp_path / "c", concurrency=1)
        assert serial_bytes == first_bytes

        # Two equally weighted criteria judged support and somewhat_support.
        criteria = CriteriaSet(
            criteria=(
                Criterion(id="c1", kind=CriterionKind.TASK, name="first", description="d", weight=0.5),
                Criterion(id="c2", kind=CriterionKind.TASK, name="second", description="d", weight=0.5),
            )
        )
        assessments = (
            CriterionAssessment(criterion_id="c1", verdict=AssessmentVerdict.SUPPORT, explanation="e"),
            CriterionAssessment(criterion_id="c2", verdict=AssessmentVerdict.SOMEWHAT_SUPPORT, explanation="e"),
        )
        score = score_paper(assessments, criteria)
        assert score == 0.75
        assert classify(score, assessments) is PaperClassification.PARTIAL


# --- 9: session durability --------------------------------------------------------


def random_session(rng, index):
    from test_orchestrator import make_plan as session_plan
    from test_orchestrator import make_verdict

    sid = f"s{index:02d}"
    plan_count = rng.randint(1, 3)
    plans = tuple(session_plan(version=v) for v in range(1, plan_count + 1))
    tick = 0
    runs = []
    last_ts = T0
    for run_no in range(rng.randint(0, 3)):
        tick += 2
        started = T0 + timedelta(seconds=tick)
        finished = started + timedelta(seconds=1)
        status = rng.choice([RunStatus.DONE, RunStatus.FAILED])
        verdicts = tuple(
            make_verdict(f"p{n}", score=round(rng.random(), 3))
            for n in range(rng.randint(0, 4))
        )
        runs.append(
            RunRecord(
                run_id=f"r{run_no}",
                plan_version=rng.randint(1, plan_count),
                status=status,
                started_at=started,
                verdicts=verdicts,
                finished_at=finished,
                degraded=rng.random() < 0.3,
                error="went wrong" if status is RunStatus.FAILED else None,
            )
        )
        last_ts = finished
    if runs and rng.random() < 0.3:
        tick += 2
        started = T0 + timedelta(seconds=tick)
        runs.append(
            RunRecord(run_id="r-live", plan_version=plan_count, status=RunStatus.RUNNING, started_at=started)
        )
        last_ts = started
    return SearchSession(
        session_id=sid,
        query=ResearchQuery(text=f"query {index}", timestamp=T0),
        status=SessionStatus.READY,
        created_at=T0,
        updated_at=last_ts,
        plans=plans,
        runs=tuple(runs),
    )


def test_session_durability(tmp_path):
    with acceptance_line("session durability (randomized round-trips + corrupt line report)"):
        rng = random.Random(60901)
        store = SessionStore(tmp_path / "store")
        for i in range(25):
            session = random_session(rng, i)
            store.persist(session)
            loaded = store.load(session.session_id)
            assert loaded == session
            assert canonical_json(session_to_jsonable(loaded)) == canonical_json(
                session_to_jsonable(session)
            )

        session = random_session(rng, 99)
        path = store.persist(session)
        lines = path.read_text(encoding="utf-8").splitlines()
        path.write_text("\n".join(lines + ['{"event": "created", broken']) + "\n", encoding="utf-8")
        with pytest.raises(SessionLogError) as info:
            store.load(session.session_id)
        err = info.value
        assert err.line_number == len(lines) + 1
        assert f"(line {len(lines) + 1})" in str(err)
        assert "invalid JSON" in str(err)
        assert err.partial == session


# --- 10: offline and self-contained ------------------------------------------------


def test_offline_and_standalone():
    with acceptance_line("offline run (sockets blocked, no secondary component loaded)"):
        with pytest.raises(AssertionError, match="network access attempted"):
            socket.create_connection(("127.0.0.1", 9))
        probe = socket.socket()
        try:
            with pytest.raises(AssertionError, match="network access attempted"):
                probe.connect(("127.0.0.1", 9))
        finally:
            probe.close()
        top_level = {name.split(".")[0] for name in sys.modules}
        assert "frontend" not in top_level
        assert "webui" not in top_level
