"""Effectiveness levels and ideal rankings.

An ideal ranking orders the judged documents of a topic by effectiveness
level, best level first, with every ordering of documents inside one level
equally ideal.  The level structure can come from graded judgments, from a
top-k preference result, or from both combined.  Documents of grade 0 (and
unjudged documents) form the implicit bottom level and never appear in an
ideal ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from prefeval.trec_io import GradedQrels, PreferenceQrels

# count_ideal_rankings saturates above this bound (64-bit signed range).
_COUNT_SATURATION = 2**63 - 1


def _check_disjoint(sets: Sequence[frozenset[str]], what: str) -> None:
    seen: set[str] = set()
    for group in sets:
        clash = seen & group
        if clash:
            raise ValueError(f"{what} share documents: {sorted(clash)[:5]}")
        seen |= group


@dataclass(frozen=True)
class EffectivenessLevels:
    """Ordered partition of the judged-effective documents of one topic.

    ``levels[0]`` is the best level.  Levels are non-empty and pairwise
    disjoint; a topic with no effective documents has zero levels.
    """

    topic_id: str
    levels: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        for i, level in enumerate(self.levels):
            if not level:
                raise ValueError(f"level {i} of topic {self.topic_id} is empty")
        _check_disjoint(self.levels, "levels")

    def all_docs(self) -> frozenset[str]:
        out: set[str] = set()
        for level in self.levels:
            out |= level
        return frozenset(out)


@dataclass(frozen=True)
class TopKResult:
    """Outcome of a top-k campaign: ordered tie groups, best group first.

    ``k_effective`` can exceed ``k_requested`` when the boundary group
    straddles rank k; it is the total number of returned documents.
    """

    topic_id: str
    groups: tuple[frozenset[str], ...]
    k_requested: int
    k_effective: int

    def __post_init__(self) -> None:
        if self.k_requested < 1:
            raise ValueError(f"k_requested must be >= 1, got {self.k_requested}")
        for i, group in enumerate(self.groups):
            if not group:
                raise ValueError(f"group {i} of topic {self.topic_id} is empty")
        _check_disjoint(self.groups, "groups")
        total = sum(len(g) for g in self.groups)
        if total != self.k_effective:
            raise ValueError(f"k_effective {self.k_effective} != {total} grouped docs")

    def all_docs(self) -> frozenset[str]:
        out: set[str] = set()
        for group in self.groups:
            out |= group
        return frozenset(out)


def levels_from_grades(qrels: GradedQrels, topic_id: str) -> EffectivenessLevels:
    """One level per positive grade, highest grade first; empty grades drop out."""
    sets = qrels.grade_sets(topic_id)
    levels = [
        frozenset(sets[grade])
        for grade in sorted(sets, reverse=True)
        if grade > 0 and sets[grade]
    ]
    return EffectivenessLevels(topic_id, tuple(levels))


def levels_from_topk(result: TopKResult) -> EffectivenessLevels:
    """Each tie group of a top-k result becomes one level."""
    if not result.groups:
        raise ValueError(f"top-k result for topic {result.topic_id} is empty")
    return EffectivenessLevels(result.topic_id, result.groups)


def levels_from_preferences(prefs: PreferenceQrels, topic_id: str) -> EffectivenessLevels:
    """Levels from preference values: one level per distinct value, descending."""
    return EffectivenessLevels(topic_id, tuple(prefs.level_groups(topic_id)))


def topk_from_preferences(prefs: PreferenceQrels, topic_id: str) -> TopKResult:
    groups = tuple(prefs.level_groups(topic_id))
    total = sum(len(g) for g in groups)
    return TopKResult(topic_id, groups, k_requested=max(total, 1), k_effective=total)


def levels_combined(
    topk: TopKResult, qrels: GradedQrels, topic_id: str
) -> EffectivenessLevels:
    """Top-k groups stacked above the graded levels.

    Documents already placed by the top-k result are removed from the grade
    levels below; grade levels emptied by the removal drop out.
    """
    if topk.topic_id != topic_id:
        raise ValueError(f"top-k result is for topic {topk.topic_id}, not {topic_id}")
    placed = topk.all_docs()
    graded = levels_from_grades(qrels, topic_id)
    below = [level - placed for level in graded.levels]
    levels = list(topk.groups) + [frozenset(level) for level in below if level]
    return EffectivenessLevels(topic_id, tuple(levels))


def best_ideal(levels: EffectivenessLevels, actual: Sequence[str]) -> list[str]:
    """The ideal ranking closest to ``actual``.

    Within each level, documents that ``actual`` retrieved come first in
    their retrieved order; the rest follow sorted by doc id.  Among all
    ideal rankings this one maximizes rank-biased overlap with ``actual``,
    and the ordering of the unretrieved tail has no effect on the score.
    """
    position = {doc: i for i, doc in enumerate(actual)}
    out: list[str] = []
    for level in levels.levels:
        retrieved = sorted((d for d in level if d in position), key=position.__getitem__)
        missing = sorted(d for d in level if d not in position)
        out.extend(retrieved)
        out.extend(missing)
    return out


def count_ideal_rankings(levels: EffectivenessLevels) -> int | None:
    """Number of distinct ideal rankings (product of level factorials).

    Returns None once the exact count exceeds the 64-bit signed range;
    the count is informational, so saturation beats a surprise bignum.
    """
    total = 1
    for level in levels.levels:
        if len(level) > 20:  # 21! alone exceeds the saturation bound
            return None
        total *= math.factorial(len(level))
        if total > _COUNT_SATURATION:
            return None
    return total
