"""Random pairing plans for reduction rounds and round robins.

A reduction round pairs every pool candidate against ``pairings`` others
chosen at random, never repeating a pair judged in an earlier round.  When
pool size times ``pairings`` is odd one candidate takes an extra pairing so
the degree sum stays even; that is the minimal unevenness possible.

The generator is the stub-matching scheme used for random regular graphs
(adapted from NetworkX): pair up shuffled degree stubs, keep the valid
edges, and re-shuffle the leftovers while a valid completion can still
exist.  Whole attempts restart on dead ends, bounded by ``max_attempts``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Collection, Iterable

if TYPE_CHECKING:  # pragma: no cover
    from prefeval.campaign.pool import CandidatePool

Pair = tuple[str, str]


def _ordered(a: str, b: str) -> Pair:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class PairingPlan:
    """The unordered document pairs to judge in one round."""

    topic_id: str
    round: int
    pairs: frozenset[Pair]

    def __post_init__(self) -> None:
        for a, b in self.pairs:
            if a >= b:
                raise ValueError(f"pair ({a!r}, {b!r}) is not in canonical order")

    def docs(self) -> set[str]:
        return {doc for pair in self.pairs for doc in pair}

    def degrees(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a, b in self.pairs:
            out[a] = out.get(a, 0) + 1
            out[b] = out.get(b, 0) + 1
        return out


def _suitable(edges: set[Pair], potential: dict[str, int], forbidden: frozenset[Pair]) -> bool:
    """True if the leftover stubs can still form some valid edge."""
    if not potential:
        return True
    nodes = list(potential)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            if _ordered(s1, s2) not in edges and _ordered(s1, s2) not in forbidden:
                return True
    return False


def _try_pairing(
    nodes: list[str],
    degrees: dict[str, int],
    forbidden: frozenset[Pair],
    rng: random.Random,
) -> set[Pair] | None:
    edges: set[Pair] = set()
    stubs = [node for node in nodes for _ in range(degrees[node])]
    while stubs:
        potential: dict[str, int] = {}
        rng.shuffle(stubs)
        stub_iter = iter(stubs)
        for s1, s2 in zip(stub_iter, stub_iter):
            pair = _ordered(s1, s2)
            if s1 != s2 and pair not in edges and pair not in forbidden:
                edges.add(pair)
            else:
                potential[s1] = potential.get(s1, 0) + 1
                potential[s2] = potential.get(s2, 0) + 1
        if not _suitable(edges, potential, forbidden):
            return None
        stubs = [node for node, count in potential.items() for _ in range(count)]
    return edges


def plan_reduction_round(
    pool: "CandidatePool",
    pairings: int,
    seed: int | str,
    history: Collection[Pair] = (),
    max_attempts: int = 200,
) -> PairingPlan:
    """Build the random pairing plan for one reduction round.

    Every candidate receives ``pairings`` partners (one candidate gets an
    extra partner when the degree sum would be odd).  Pairs present in
    ``history`` are never reissued.  Raises CampaignError when no plan is
    found within ``max_attempts``, for example because too few unjudged
    pairs remain.
    """
    from prefeval.campaign.state import CampaignError

    nodes = sorted(pool.candidates)
    n = len(nodes)
    if pairings < 1:
        raise ValueError(f"pairings must be >= 1, got {pairings}")
    if pairings >= n:
        raise ValueError(
            f"topic {pool.topic_id}: cannot pair each of {n} candidates "
            f"against {pairings} others"
        )
    forbidden = frozenset(_ordered(a, b) for a, b in history)
    rng = random.Random(f"{seed}:{pool.topic_id}:round:{pool.round}")

    degrees = {node: pairings for node in nodes}
    if (n * pairings) % 2 == 1:
        degrees[rng.choice(nodes)] += 1

    # Necessary condition: every node needs enough unjudged partners.
    for node in nodes:
        used = sum(1 for pair in forbidden if node in pair and pair[0] in degrees and pair[1] in degrees)
        if n - 1 - used < degrees[node]:
            raise CampaignError(
                f"topic {pool.topic_id}: candidate {node} has only {n - 1 - used} "
                f"unjudged partners but needs {degrees[node]}"
            )

    for _ in range(max_attempts):
        edges = _try_pairing(nodes, degrees, forbidden, rng)
        if edges is not None:
            return PairingPlan(pool.topic_id, pool.round, frozenset(edges))
    raise CampaignError(
        f"topic {pool.topic_id}: no valid pairing found in {max_attempts} attempts "
        f"(pool size {n}, {pairings} pairings, {len(forbidden)} excluded pairs)"
    )


def plan_round_robin(pool: "CandidatePool") -> PairingPlan:
    """Every unordered pair of the pool; earlier judgments are re-collected."""
    pairs = frozenset(_ordered(a, b) for a, b in combinations(sorted(pool.candidates), 2))
    return PairingPlan(pool.topic_id, pool.round, pairs)
