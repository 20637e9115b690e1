"""Evaluation toolkit: text metrics, scoring reports, and training signals.

``litscout.evalkit.reports`` and ``litscout.evalkit.figures`` are imported
as explicit submodules to keep this package importable without pulling in
the query parser or matplotlib.
"""

from litscout.evalkit.metrics import (
    HashedNgramEmbedder,
    RougeScore,
    bleu,
    length_ratio,
    rouge_l,
    rouge_n,
    semantic_similarity,
    tokenize,
)
from litscout.evalkit.training import (
    broadcast_token_advantages,
    group_advantages,
    reward,
)

__all__ = [
    "HashedNgramEmbedder",
    "RougeScore",
    "bleu",
    "broadcast_token_advantages",
    "group_advantages",
    "length_ratio",
    "reward",
    "rouge_l",
    "rouge_n",
    "semantic_similarity",
    "tokenize",
]
