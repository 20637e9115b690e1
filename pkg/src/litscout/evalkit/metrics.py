"""Text-overlap and similarity metrics used for evaluation and retrieval.

All metrics share one tokenizer so that scores are comparable across the
package.  ROUGE and BLEU are computed from first principles; the semantic
similarity embedder is a deterministic feature-hashing model that needs no
network access or model weights.
"""

from __future__ import annotations

import hashlib
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from litscout.errors import MetricError, TransportError

# CJK unified ideograph blocks; each character in them is its own token.
_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2FA1F),
)

# ASCII fast path: codepoints below 128 that split tokens.  Matches the
# general rule (whitespace or Unicode punctuation); ASCII symbols like
# + < = > | $ are category S and therefore kept.
_ASCII_SEPARATORS = frozenset(
    ch for ch in map(chr, range(128))
    if ch.isspace() or unicodedata.category(ch).startswith("P")
)


def _is_cjk(code: int) -> bool:
    for lo, hi in _CJK_RANGES:
        if lo <= code <= hi:
            return True
    return False


@lru_cache(maxsize=4096)
def _splits_token(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase a string and split it into tokens.

    Whitespace and Unicode punctuation separate tokens and are dropped;
    symbol characters are kept inside tokens.  Characters in the CJK
    unified-ideograph blocks each form their own token.
    """
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        code = ord(ch)
        if code < 128:
            if ch in _ASCII_SEPARATORS:
                if current:
                    tokens.append("".join(current))
                    current = []
            else:
                current.append(ch)
            continue
        if _is_cjk(code):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        elif _splits_token(ch):
            if current:
                tokens.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int = 1) -> RougeScore:
    """N-gram overlap between the tokenizations of two strings.

    Precision divides the clipped match count by the candidate n-gram count,
    recall by the reference n-gram count.  Either side having no n-grams
    yields all-zero scores.
    """
    if n < 1:
        raise MetricError("n must be >= 1")
    cand = tokenize(candidate)
    ref = tokenize(reference)
    nc = max(len(cand) - n + 1, 0)
    nr = max(len(ref) - n + 1, 0)
    if nc == 0 or nr == 0:
        return RougeScore(0.0, 0.0, 0.0)
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    matched = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    if matched == 0:
        return RougeScore(0.0, 0.0, 0.0)
    return RougeScore(matched / nc, matched / nr, 2.0 * matched / (nc + nr))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence overlap between two tokenized strings."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    nc = len(cand)
    nr = len(ref)
    if nc == 0 or nr == 0:
        return RougeScore(0.0, 0.0, 0.0)
    matched = _lcs_length(cand, ref)
    if matched == 0:
        return RougeScore(0.0, 0.0, 0.0)
    return RougeScore(matched / nc, matched / nr, 2.0 * matched / (nc + nr))


def bleu(candidate: str, references: Sequence[str], max_n: int = 4) -> float:
    """BLEU for a single candidate string against one or more references.

    Uses clipped n-gram precisions up to ``max_n`` with uniform weights.
    A zero match count at n >= 2 is smoothed by adding one to numerator and
    denominator; orders longer than the candidate count as precision one.
    An empty candidate, or no unigram match at all, scores zero.  The
    brevity penalty uses the reference length closest to the candidate's
    (ties broken toward the shorter reference).
    """
    if max_n < 1:
        raise MetricError("max_n must be >= 1")
    refs = [tokenize(r) for r in references]
    if not refs:
        raise MetricError("at least one reference is required")
    cand = tokenize(candidate)
    c = len(cand)
    if c == 0:
        return 0.0
    r = min((len(ref) for ref in refs), key=lambda length: (abs(length - c), length))
    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        total = max(c - n + 1, 0)
        cand_counts = _ngram_counts(cand, n)
        clipped = 0
        if cand_counts:
            max_ref_counts: Counter = Counter()
            for ref in refs:
                for gram, count in _ngram_counts(ref, n).items():
                    if count > max_ref_counts[gram]:
                        max_ref_counts[gram] = count
            clipped = sum(
                min(count, max_ref_counts[gram]) for gram, count in cand_counts.items()
            )
        if total == 0:
            precision = 1.0
        elif clipped > 0:
            precision = clipped / total
        elif n == 1:
            return 0.0
        else:
            precision = (clipped + 1) / (total + 1)
        log_precision_sum += math.log(precision) / max_n
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_precision_sum)


class HashedNgramEmbedder:
    """Deterministic text embedder based on feature hashing.

    Unigrams and bigrams of the shared tokenizer are hashed into a
    fixed number of buckets; the resulting count vector is L2-normalized.
    Identical strings always embed identically, so cosine similarity over
    these vectors is reproducible everywhere.
    """

    def __init__(self, dim: int = 1024):
        if dim < 1:
            raise MetricError("embedding dimension must be >= 1")
        self.dim = dim

    def bucket(self, feature: str) -> int:
        digest = hashlib.sha256(feature.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dim

    def __call__(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = tokenize(text)
        for token in tokens:
            vec[self.bucket("1:" + token)] += 1.0
        for first, second in zip(tokens, tokens[1:]):
            vec[self.bucket("2:" + first + "\x1f" + second)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class RemoteEmbedder:
    """Embedding client for an HTTP backend with an embeddings endpoint.

    Failures always surface as :class:`TransportError`; similarity is never
    silently substituted with a local fallback.
    """

    def __init__(self, endpoint: str, model_name: str, *, timeout: float = 30.0,
                 api_key: str | None = None, transport: Callable | None = None):
        self.endpoint = endpoint
        self.model_name = model_name
        self.timeout = timeout
        self.api_key = api_key
        self._transport = transport or self._http_post

    def _http_post(self, payload: dict) -> dict:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        response.raise_for_status()
        return response.json()

    def __call__(self, text: str) -> np.ndarray:
        payload = {"model": self.model_name, "input": [text]}
        try:
            data = self._transport(payload)
            embedding = data["data"][0]["embedding"]
        except Exception as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        return np.asarray(embedding, dtype=np.float64)


def semantic_similarity(a: str, b: str, embedder: Callable[[str], np.ndarray] | None = None) -> float:
    """Cosine similarity between the embeddings of two strings.

    Returns 0.0 whenever either embedding has zero norm.
    """
    if embedder is None:
        embedder = HashedNgramEmbedder()
    va = np.asarray(embedder(a), dtype=np.float64)
    vb = np.asarray(embedder(b), dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


def length_ratio(candidate: str, reference: str) -> float:
    """Candidate-to-reference token count as a percentage."""
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise MetricError("length ratio is undefined for a reference with no tokens")
    return 100.0 * len(tokenize(candidate)) / len(ref_tokens)
