"""Monte-Carlo simulation of the assessment protocol.

Simulated assessors judge pairs against a known true ordering, either
perfectly (``error_rate`` 0) or flipping each judgment independently with
probability ``error_rate``.  The simulator drives the same plan/cull/
finalize operations as a live campaign, so its statistics describe the real
protocol: judgment cost, top-k recovery accuracy, pool shrinkage per
reduction round, and how often the k-th best candidate is knocked out by an
unlucky draw (paired against all k-1 better candidates and so denied a
majority).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.pairing import Pair, plan_reduction_round, plan_round_robin
from prefeval.campaign.pool import CandidatePool, cull, finalize_topk
from prefeval.campaign.state import CampaignError
from prefeval.campaign.tournament import TournamentSession


@dataclass
class AssessorModel:
    """Judges pairs against a true ordering, with optional noise.

    ``order`` lists documents best first.  A consistent assessor always
    prefers the better-ranked document; a noisy one flips each judgment
    independently with probability ``error_rate``.
    """

    order: Sequence[str]
    error_rate: float = 0.0
    seed: int | str = 0
    _rank: dict[str, int] = field(init=False, repr=False)
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError(f"error_rate must be in [0, 1], got {self.error_rate}")
        self._rank = {doc: i for i, doc in enumerate(self.order)}
        if len(self._rank) != len(self.order):
            raise ValueError("true ordering repeats a document")
        self._rng = random.Random(f"{self.seed}:assessor")

    @property
    def kind(self) -> str:
        return "consistent" if self.error_rate == 0.0 else "noisy"

    def judge(self, doc_a: str, doc_b: str) -> str:
        better = doc_a if self._rank[doc_a] < self._rank[doc_b] else doc_b
        if self.error_rate > 0.0 and self._rng.random() < self.error_rate:
            return doc_a if better == doc_b else doc_b
        return better


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate statistics over all simulated trials."""

    trials: int
    topics: int
    mode: str
    error_rate: float
    mean_judgments: float
    recovery_rate: float
    mean_pool_by_round: tuple[float, ...]
    survivor_fraction_by_round: tuple[float, ...]
    mean_survivor_fraction: float | None
    knockout_rate: float | None
    knockout_se: float | None
    knockout_samples: int


def _run_crowdsourced(
    order: Sequence[str],
    config: CampaignConfig,
    assessor: AssessorModel,
    seed: str,
) -> tuple[int, frozenset[str], list[tuple[int, int]], bool | None]:
    """One crowdsourced trial: (judgments, winners, per-round sizes, knockout)."""
    pool = CandidatePool(
        topic_id="sim", candidates=frozenset(order), stage="thinned", round=0
    )
    n0 = len(order)
    judgments = 0
    history: set[Pair] = set()
    shrinkage: list[tuple[int, int]] = []
    knockout: bool | None = None
    if n0 == 0:
        return 0, frozenset(), [], None
    if n0 <= config.round_robin_threshold:
        pool = CandidatePool("sim", pool.candidates, "round_robin", 0)
    else:
        pool = CandidatePool("sim", pool.candidates, "reduction", 1)
    while pool.stage == "reduction":
        try:
            plan = plan_reduction_round(pool, config.pairings_per_round, seed, history)
        except CampaignError:
            # No fresh full-degree pairing left: same early round-robin
            # fallback the live campaign takes.
            pool = CandidatePool("sim", pool.candidates, "round_robin", 0)
            break
        winners = {pair: assessor.judge(*pair) for pair in sorted(plan.pairs)}
        judgments += len(winners)
        if (
            pool.round == 1
            and len(pool.candidates) == config.round_robin_threshold + 1
            and len(order) >= config.top_k
        ):
            # Unlucky-draw event for the k-th best candidate: it met every
            # better candidate this round and could not reach a majority.
            kth = order[config.top_k - 1]
            better = set(order[: config.top_k - 1])
            partners = {a if b == kth else b for a, b in plan.pairs if kth in (a, b)}
            degree = len(partners)
            wins = sum(1 for p in partners if winners[tuple(sorted((kth, p)))] == kth)
            knockout = better <= partners and 2 * wins <= degree
        before = len(pool.candidates)
        history |= plan.pairs
        pool = cull(pool, plan, winners, config)
        shrinkage.append((before, len(pool.candidates)))
    plan = plan_round_robin(pool)
    winners = {pair: assessor.judge(*pair) for pair in sorted(plan.pairs)}
    judgments += len(winners)
    result = finalize_topk(pool, winners, config.top_k)
    return judgments, result.all_docs(), shrinkage, knockout


def _run_tournament(
    order: Sequence[str], config: CampaignConfig, assessor: AssessorModel, seed: str
) -> tuple[int, frozenset[str]]:
    session = TournamentSession("sim", order, config.top_k, seed)
    while not session.is_complete:
        doc_a, doc_b = session.next_pair()
        session.report(doc_a, doc_b, assessor.judge(doc_a, doc_b))
    return session.judgments_used, session.result().all_docs()


def simulate_campaign(
    true_orders: Mapping[str, Sequence[str]],
    config: CampaignConfig,
    trials: int = 1,
    error_rate: float = 0.0,
    seed: int | str | None = None,
) -> SimulationReport:
    """Simulate the campaign ``trials`` times over the given topics.

    ``true_orders`` maps each topic to its candidate pool listed best first
    (thinning is assumed done).  Recovery counts a trial-topic as correct
    when the returned document set equals the true top-k exactly.  Knockout
    statistics are collected only for pools of round_robin_threshold + 1
    candidates, where the unlucky draw is possible in round one.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    base = config.seed if seed is None else seed
    judgments_per_trial: list[int] = []
    recovered = 0
    scored = 0
    shrink_by_round: dict[int, list[float]] = {}
    pool_by_round: dict[int, list[int]] = {}
    knockouts = 0
    knockout_samples = 0
    for trial in range(trials):
        total = 0
        for topic_id in sorted(true_orders):
            order = list(true_orders[topic_id])
            trial_seed = f"{base}:{topic_id}:trial:{trial}"
            assessor = AssessorModel(order, error_rate, seed=trial_seed)
            if config.mode == "tournament":
                used, docs = _run_tournament(order, config, assessor, trial_seed)
            else:
                used, docs, shrinkage, knockout = _run_crowdsourced(
                    order, config, assessor, trial_seed
                )
                for round_index, (before, after) in enumerate(shrinkage, 1):
                    shrink_by_round.setdefault(round_index, []).append(after / before)
                    pool_by_round.setdefault(round_index, []).append(before)
                if knockout is not None:
                    knockout_samples += 1
                    knockouts += knockout
            total += used
            if order:
                scored += 1
                recovered += docs == frozenset(order[: config.top_k])
        judgments_per_trial.append(total)
    rounds = sorted(shrink_by_round)
    fractions = tuple(
        sum(shrink_by_round[r]) / len(shrink_by_round[r]) for r in rounds
    )
    all_fractions = [f for r in rounds for f in shrink_by_round[r]]
    knockout_rate = knockouts / knockout_samples if knockout_samples else None
    knockout_se = None
    if knockout_samples and knockout_rate is not None:
        knockout_se = (knockout_rate * (1.0 - knockout_rate) / knockout_samples) ** 0.5
    return SimulationReport(
        trials=trials,
        topics=len(true_orders),
        mode=config.mode,
        error_rate=error_rate,
        mean_judgments=sum(judgments_per_trial) / trials,
        recovery_rate=recovered / scored if scored else 0.0,
        mean_pool_by_round=tuple(
            sum(pool_by_round[r]) / len(pool_by_round[r]) for r in rounds
        ),
        survivor_fraction_by_round=fractions,
        mean_survivor_fraction=(
            sum(all_fractions) / len(all_fractions) if all_fractions else None
        ),
        knockout_rate=knockout_rate,
        knockout_se=knockout_se,
        knockout_samples=knockout_samples,
    )
