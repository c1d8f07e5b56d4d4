"""HIT batches: real pairs plus hidden challenge pairs.

Crowdsourced judging ships a pairing plan as fixed-size batches.  Each
batch mixes in challenge pairs that pit a pool candidate against a known
non-relevant document; an assessor who prefers the non-relevant side fails
the batch.  Challenge pairs are flagged only server side, and their
position and left/right orientation are randomized, so a submitted batch
is indistinguishable from an honest one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.pairing import PairingPlan, _ordered


@dataclass(frozen=True)
class BatchPair:
    """One pair as served: doc_a is the left side.

    ``challenge_loser`` is the non-relevant document of a challenge pair
    and None for real pairs.
    """

    pair_id: str
    topic_id: str
    doc_a: str
    doc_b: str
    is_challenge: bool = False
    challenge_loser: str | None = None

    def __post_init__(self) -> None:
        if self.doc_a == self.doc_b:
            raise ValueError(f"pair {self.pair_id} repeats doc {self.doc_a!r}")
        if self.is_challenge != (self.challenge_loser is not None):
            raise ValueError(f"pair {self.pair_id}: challenge flag and loser disagree")
        if self.challenge_loser is not None and self.challenge_loser not in (
            self.doc_a,
            self.doc_b,
        ):
            raise ValueError(f"pair {self.pair_id}: loser is not one of the docs")

    def key(self) -> tuple[str, str]:
        return _ordered(self.doc_a, self.doc_b)


@dataclass(frozen=True)
class HitBatch:
    batch_id: str
    topic_id: str
    pairs: tuple[BatchPair, ...]

    def real_pairs(self) -> tuple[BatchPair, ...]:
        return tuple(p for p in self.pairs if not p.is_challenge)

    def pair_by_key(self) -> dict[tuple[str, str], BatchPair]:
        return {p.key(): p for p in self.pairs}


def build_hits(
    plan: PairingPlan,
    nonrelevant: Sequence[str],
    config: CampaignConfig,
    seed: int | str,
    label: str = "r1",
) -> tuple[HitBatch, ...]:
    """Split a plan into batches of ``hit_size`` real pairs plus challenges.

    The final batch may be short.  Rebuilding with the same seed and label
    reproduces the batches exactly, including challenge placement and
    left/right orientation.  Raises ValueError when challenges are requested
    but no non-relevant documents exist for the topic.
    """
    if config.challenges_per_hit > 0 and not nonrelevant:
        raise ValueError(
            f"topic {plan.topic_id}: challenges requested but the topic has "
            f"no judged non-relevant documents"
        )
    rng = random.Random(f"{seed}:{plan.topic_id}:{label}:hits")
    real = sorted(plan.pairs)
    rng.shuffle(real)
    candidates = sorted(plan.docs())
    nonrel = sorted(set(nonrelevant))
    batches: list[HitBatch] = []
    for start in range(0, len(real), config.hit_size):
        chunk = real[start : start + config.hit_size]
        items: list[tuple[str, str, str | None]] = []
        for x, y in chunk:
            a, b = (x, y) if rng.random() < 0.5 else (y, x)
            items.append((a, b, None))
        used = {_ordered(a, b) for a, b, _ in items}
        for _ in range(config.challenges_per_hit):
            for _attempt in range(1000):
                candidate = rng.choice(candidates)
                loser = rng.choice(nonrel)
                if candidate != loser and _ordered(candidate, loser) not in used:
                    break
            else:
                raise ValueError(
                    f"topic {plan.topic_id}: could not draw a fresh challenge pair"
                )
            used.add(_ordered(candidate, loser))
            a, b = (candidate, loser) if rng.random() < 0.5 else (loser, candidate)
            items.insert(rng.randrange(len(items) + 1), (a, b, loser))
        batch_id = f"{plan.topic_id}:{label}:b{start // config.hit_size:03d}"
        pairs = tuple(
            BatchPair(
                pair_id=f"{batch_id}:p{i:02d}",
                topic_id=plan.topic_id,
                doc_a=a,
                doc_b=b,
                is_challenge=loser is not None,
                challenge_loser=loser,
            )
            for i, (a, b, loser) in enumerate(items)
        )
        batches.append(HitBatch(batch_id, plan.topic_id, pairs))
    return tuple(batches)


@dataclass(frozen=True)
class HitValidation:
    accepted: bool
    reason: str | None = None


def validate_hit(batch: HitBatch, judgments: Mapping[str, str]) -> HitValidation:
    """Check one complete submission (pair_id -> winning doc) of a batch.

    The batch is rejected as soon as any challenge pair names the
    non-relevant document as winner.  Missing or unknown pair ids and
    winners outside the pair are submission errors, not rejections.
    """
    known = {p.pair_id: p for p in batch.pairs}
    missing = sorted(set(known) - set(judgments))
    if missing:
        raise ValueError(f"batch {batch.batch_id}: incomplete submission, missing {missing}")
    unknown = sorted(set(judgments) - set(known))
    if unknown:
        raise ValueError(f"batch {batch.batch_id}: unknown pair id(s) {unknown}")
    for pair_id, winner in sorted(judgments.items()):
        pair = known[pair_id]
        if winner not in (pair.doc_a, pair.doc_b):
            raise ValueError(
                f"batch {batch.batch_id}: winner {winner!r} is not in pair {pair_id}"
            )
        if pair.is_challenge and winner == pair.challenge_loser:
            return HitValidation(False, f"challenge pair {pair_id} failed")
    return HitValidation(True)
