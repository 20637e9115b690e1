"""Reward and advantage computation for grouped rollouts.

A rollout group holds one reward per sampled completion for the same
prompt.  Advantages are the group-standardized rewards, broadcast
unchanged over every token of the corresponding completion.
"""

from __future__ import annotations

import math
from typing import Sequence

from litscout.errors import MetricError


def reward(predicted: str, gold: str) -> int:
    """Exact-match reward: 1 when the prediction equals the gold label."""
    return 1 if predicted == gold else 0


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Standardize a reward group to zero mean and unit variance.

    Uses the population standard deviation.  A group whose rewards are all
    equal has no signal and maps to all-zero advantages.
    """
    values = [float(r) for r in rewards]
    if len(values) < 2:
        raise MetricError("a reward group needs at least two rollouts")
    for v in values:
        if not math.isfinite(v):
            raise MetricError("rewards must be finite numbers")
    if max(values) == min(values):
        return [0.0] * len(values)
    mean = sum(values) / len(values)
    variance = sum((v - mean) ** 2 for v in values) / len(values)
    std = math.sqrt(variance)
    return [(v - mean) / std for v in values]


def broadcast_token_advantages(
    advantages: Sequence[float], token_counts: Sequence[int]
) -> list[list[float]]:
    """Repeat each rollout's advantage across all of its tokens."""
    if len(advantages) != len(token_counts):
        raise MetricError("advantages and token_counts must have equal length")
    out: list[list[float]] = []
    for adv, count in zip(advantages, token_counts):
        if count < 0:
            raise MetricError("token counts must be non-negative")
        out.append([float(adv)] * count)
    return out
