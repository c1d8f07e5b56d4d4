"""Candidate pools and the operations that shrink them.

Per-topic protocol: thinning seeds the pool from graded judgments, random
reduction rounds cull candidates that fail to win a majority of their
pairings, and once the pool is small enough a full round robin fixes the
final top-k ordering by win count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.pairing import Pair, PairingPlan, _ordered
from prefeval.ideal import TopKResult
from prefeval.trec_io import GradedQrels, PreferenceEntry, PreferenceJudgment, PreferenceQrels

logger = logging.getLogger(__name__)

# A pool is judged in exactly one of these stages at a time; transitions
# only move forward.  Tournament mode replaces both judging stages.
STAGES = ("thinned", "reduction", "round_robin", "tournament", "finalized")


@dataclass(frozen=True)
class CandidatePool:
    """The documents of one topic still in contention for the top-k.

    ``round`` is the current reduction round while reducing, and the number
    of completed reduction rounds afterwards.  A finalized pool carries its
    TopKResult.
    """

    topic_id: str
    candidates: frozenset[str]
    stage: str = "thinned"
    round: int = 0
    result: TopKResult | None = None

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if (self.result is not None) != (self.stage == "finalized"):
            raise ValueError("exactly the finalized stage carries a result")


def thin_herd(qrels: GradedQrels, topic_id: str, k: int) -> CandidatePool:
    """Seed the candidate pool from graded judgments.

    Grade sets join the pool from the highest grade down until at least k
    candidates are collected; grade 0 never joins.  Topics can end under k
    when the positive grades run out.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sets = qrels.grade_sets(topic_id)
    pool: set[str] = set()
    for grade in sorted((g for g in sets if g > 0), reverse=True):
        if len(pool) >= k:
            break
        pool |= sets[grade]
    return CandidatePool(topic_id, frozenset(pool), "thinned")


def _win_counts(
    candidates: frozenset[str], pairs: frozenset[Pair], winners: Mapping[Pair, str]
) -> tuple[dict[str, int], dict[str, int]]:
    """Per-candidate (wins, degree) over the given pairs; all pairs judged."""
    from prefeval.campaign.state import CampaignError

    missing = sorted(pair for pair in pairs if pair not in winners)
    if missing:
        shown = ", ".join(f"{a}|{b}" for a, b in missing[:5])
        more = "" if len(missing) <= 5 else f" (+{len(missing) - 5} more)"
        raise CampaignError(f"unjudged pairs remain: {shown}{more}")
    wins = {c: 0 for c in candidates}
    degree = {c: 0 for c in candidates}
    for pair in pairs:
        a, b = pair
        winner = winners[pair]
        if winner not in (a, b):
            raise ValueError(f"winner {winner!r} is not in pair ({a!r}, {b!r})")
        degree[a] += 1
        degree[b] += 1
        wins[winner] += 1
    return wins, degree


def cull(
    pool: CandidatePool,
    plan: PairingPlan,
    winners: Mapping[Pair, str],
    config: CampaignConfig,
) -> CandidatePool:
    """Drop every candidate that failed to win a strict majority of its pairings.

    A candidate judged d times survives only with more than d/2 wins, so a
    candidate that won all its pairings always survives.  If fewer than
    top_k candidates survive, the top-k by win count are retained instead,
    keeping everyone tied at the boundary.  The surviving pool moves to the
    next reduction round, or to the round robin once small enough.
    """
    if pool.stage != "reduction":
        raise ValueError(f"topic {pool.topic_id}: cannot cull a {pool.stage} pool")
    wins, degree = _win_counts(pool.candidates, plan.pairs, winners)
    survivors = {c for c in pool.candidates if 2 * wins[c] > degree[c]}
    if len(survivors) < config.top_k:
        by_wins = sorted(pool.candidates, key=lambda c: (-wins[c], c))
        cutoff = min(config.top_k, len(by_wins)) - 1
        boundary = wins[by_wins[cutoff]]
        survivors = {c for c in pool.candidates if wins[c] >= boundary}
    if len(survivors) > config.round_robin_threshold:
        return CandidatePool(pool.topic_id, frozenset(survivors), "reduction", pool.round + 1)
    return CandidatePool(pool.topic_id, frozenset(survivors), "round_robin", pool.round)


def finalize_topk(
    pool: CandidatePool, winners: Mapping[Pair, str], k: int
) -> TopKResult:
    """Rank the round-robin pool by win count and cut at rank k.

    Candidates with equal win counts form one group; if the boundary group
    straddles rank k the whole group is kept, so k_effective >= k whenever
    the pool holds at least k documents.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    pairs = frozenset(
        _ordered(a, b) for a, b in combinations(sorted(pool.candidates), 2)
    )
    wins, _ = _win_counts(pool.candidates, pairs, winners)
    by_count: dict[int, set[str]] = {}
    for candidate, count in wins.items():
        by_count.setdefault(count, set()).add(candidate)
    groups: list[frozenset[str]] = []
    kept = 0
    for count in sorted(by_count, reverse=True):
        groups.append(frozenset(by_count[count]))
        kept += len(by_count[count])
        if kept >= k:
            break
    return TopKResult(pool.topic_id, tuple(groups), k_requested=k, k_effective=kept)


def aggregate_pair(doc_a: str, doc_b: str, records: Sequence[PreferenceJudgment]) -> str:
    """Majority winner over the accepted records of one pair.

    An even split falls back to the lexicographically smaller document and
    logs a warning; no records at all is an error.
    """
    if not records:
        raise ValueError(f"no judgments recorded for pair ({doc_a!r}, {doc_b!r})")
    pair = _ordered(doc_a, doc_b)
    votes = {pair[0]: 0, pair[1]: 0}
    for record in records:
        if record.pair_key() != pair:
            raise ValueError(
                f"record for pair {record.pair_key()} mixed into ({doc_a!r}, {doc_b!r})"
            )
        votes[record.winner] += 1
    if votes[pair[0]] == votes[pair[1]]:
        logger.warning(
            "pair (%s, %s) split evenly over %d judgments; picking %s",
            pair[0], pair[1], len(records), pair[0],
        )
        return pair[0]
    return pair[0] if votes[pair[0]] > votes[pair[1]] else pair[1]


def topk_to_preference_qrels(results: Mapping[str, TopKResult]) -> PreferenceQrels:
    """Express top-k results as preference qrels.

    The best group of a topic gets the highest preference value (the number
    of groups), descending by one per group, so tied documents share one
    value and levels round-trip exactly.
    """
    entries: list[PreferenceEntry] = []
    for topic_id in sorted(results):
        groups = results[topic_id].groups
        for i, group in enumerate(groups):
            value = float(len(groups) - i)
            for doc_id in sorted(group):
                entries.append(PreferenceEntry(topic_id, doc_id, value))
    return PreferenceQrels(tuple(entries))
