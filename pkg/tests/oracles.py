"""Slow reference implementations the fast code is checked against.

These deliberately avoid the production code paths: overlap is recomputed
from scratch with set intersections at every depth, the maximum over ideal
rankings is taken by enumerating every permutation instead of constructing
the best one, and NDCG is a direct transcription of its definition.
"""

from __future__ import annotations

from itertools import permutations, product
from typing import Iterator, Sequence

from prefeval.ideal import EffectivenessLevels

_weight_cache: dict[tuple[float, int], tuple[list[float], list[float]]] = {}


def _weight_table(p: float, depth: int) -> tuple[list[float], list[float]]:
    """Weights (1-p) p^(i-1) / i for i = 1..depth, plus suffix sums."""
    key = (p, depth)
    if key not in _weight_cache:
        weights = [(1.0 - p) * p ** (i - 1) / i for i in range(1, depth + 1)]
        suffix = [0.0] * (depth + 1)
        for i in range(depth - 1, -1, -1):
            suffix[i] = suffix[i + 1] + weights[i]
        _weight_cache[key] = (weights, suffix)
    return _weight_cache[key]


def rbo_reference(
    actual: Sequence[str], ideal: Sequence[str], p: float = 0.95, depth: int = 1000
) -> float:
    """Textbook RBO: per-depth prefix intersections, nothing incremental."""
    weights, suffix = _weight_table(p, depth)
    exhaust = min(depth, max(len(actual), len(ideal)))
    total = 0.0
    overlap = 0
    for i in range(1, exhaust + 1):
        overlap = len(set(actual[:i]) & set(ideal[:i]))
        total += weights[i - 1] * overlap
    # Beyond both rankings the prefixes stop growing, so the overlap is fixed.
    total += overlap * suffix[exhaust]
    return total


def nrbo_reference(
    actual: Sequence[str], ideal: Sequence[str], p: float = 0.95, depth: int = 1000
) -> float:
    denom = rbo_reference(ideal, ideal, p, depth)
    if denom == 0.0:
        return 0.0
    return rbo_reference(actual, ideal, p, depth) / denom


def enumerate_ideals(levels: EffectivenessLevels) -> Iterator[list[str]]:
    """Every ideal ranking the level structure admits."""
    per_level = [list(permutations(sorted(level))) for level in levels.levels]
    for combo in product(*per_level):
        out: list[str] = []
        for perm in combo:
            out.extend(perm)
        yield out


def compatibility_brute_force(
    actual: Sequence[str],
    levels: EffectivenessLevels,
    p: float = 0.95,
    depth: int = 1000,
    normalized: bool = True,
) -> float:
    """Max (n)rbo over ALL ideal rankings, by exhaustive enumeration."""
    score = rbo_reference if not normalized else nrbo_reference
    best = 0.0
    for ideal in enumerate_ideals(levels):
        best = max(best, score(actual, ideal, p, depth))
    return best


def ndcg_reference(
    actual: Sequence[str], grades: dict[str, int], k: int
) -> float:
    from math import log2

    dcg = sum(
        grades.get(doc, 0) / log2(rank + 1)
        for rank, doc in enumerate(actual[:k], 1)
    )
    idcg = sum(
        gain / log2(rank + 1)
        for rank, gain in enumerate(sorted(grades.values(), reverse=True)[:k], 1)
    )
    return dcg / idcg if idcg > 0 else 0.0
