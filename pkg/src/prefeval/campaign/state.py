"""Event-sourced campaign state.

A campaign's durable state is exactly (config, graded qrels, judgment
ledger): every pairing plan, batch layout and stage transition is a
deterministic function of those inputs, so replaying the ledger rebuilds
the identical state.  ``Campaign.apply`` is the single applier through
which every judgment record flows, both live and during replay.

Batch submissions are grouped by (batch_id, assessor): an attempt completes
when the assessor has answered every pair of the batch, and is then either
accepted or rejected by its challenge pairs.  Rejected attempts leave the
batch pending (it ships again unchanged) and exclude the assessor from the
rest of the campaign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.hits import BatchPair, HitBatch, build_hits, validate_hit
from prefeval.campaign.pairing import (
    Pair,
    PairingPlan,
    _ordered,
    plan_reduction_round,
    plan_round_robin,
)
from prefeval.campaign.pool import CandidatePool, aggregate_pair, cull, finalize_topk, thin_herd
from prefeval.campaign.tournament import TournamentSession
from prefeval.ideal import TopKResult
from prefeval.trec_io import GradedQrels, PreferenceJudgment, PreferenceQrels


class CampaignError(Exception):
    """A protocol violation: bad transition, stale batch, excluded assessor."""


@dataclass
class TopicState:
    pool: CandidatePool
    plan: PairingPlan | None = None
    batches: tuple[HitBatch, ...] = ()
    judged_batches: set[str] = field(default_factory=set)
    accepted: dict[Pair, list[PreferenceJudgment]] = field(default_factory=dict)
    history: set[Pair] = field(default_factory=set)
    session: TournamentSession | None = None

    def stage_tag(self) -> str:
        if self.pool.stage == "reduction":
            return f"reduction:{self.pool.round}"
        return self.pool.stage


class Campaign:
    """All per-topic pools plus the shared assessor bookkeeping."""

    def __init__(
        self,
        config: CampaignConfig,
        graded: GradedQrels,
        topics: Iterable[str] | None = None,
    ):
        self.config = config
        self.graded = graded
        self.topics = sorted(topics) if topics is not None else graded.topics()
        self.excluded_assessors: set[str] = set()
        self.applied = 0
        self._attempts: dict[tuple[str, str], dict[str, PreferenceJudgment]] = {}
        self.states: dict[str, TopicState] = {}
        self.nonrelevant: dict[str, tuple[str, ...]] = {}
        for topic_id in self.topics:
            sets = graded.grade_sets(topic_id)
            self.nonrelevant[topic_id] = tuple(sorted(sets.get(0, set())))
            pool = thin_herd(graded, topic_id, config.top_k)
            state = TopicState(pool=pool)
            self.states[topic_id] = state
            self._enter_judging(state)

    # -- stage transitions ----------------------------------------------------

    def _enter_judging(self, state: TopicState) -> None:
        """Move a thinned or freshly culled pool into its next judging stage."""
        pool = state.pool
        n = len(pool.candidates)
        if pool.stage == "thinned":
            if self.config.mode == "tournament" and n > 1:
                state.pool = CandidatePool(pool.topic_id, pool.candidates, "tournament", 0)
                state.session = TournamentSession(
                    pool.topic_id,
                    pool.candidates,
                    self.config.top_k,
                    seed=self.config.seed,
                )
                return
            if n <= 1:
                groups = (frozenset(pool.candidates),) if n == 1 else ()
                result = TopKResult(pool.topic_id, groups, self.config.top_k, n)
                state.pool = CandidatePool(
                    pool.topic_id, pool.candidates, "finalized", 0, result
                )
                return
            if n <= self.config.round_robin_threshold:
                pool = CandidatePool(pool.topic_id, pool.candidates, "round_robin", 0)
            else:
                pool = CandidatePool(pool.topic_id, pool.candidates, "reduction", 1)
            state.pool = pool
        plan = None
        if pool.stage == "reduction":
            try:
                plan = plan_reduction_round(
                    pool, self.config.pairings_per_round, self.config.seed, state.history
                )
                label = f"red{pool.round}"
            except CampaignError:
                # Accumulated history can leave a shrinking pool with no fresh
                # full-degree pairing; judge every remaining pair at once.
                pool = CandidatePool(pool.topic_id, pool.candidates, "round_robin", 0)
                state.pool = pool
        if plan is None:
            plan = plan_round_robin(pool)
            label = "rr"
        state.plan = plan
        state.accepted = {pair: [] for pair in state.plan.pairs}
        state.batches = build_hits(
            state.plan,
            self.nonrelevant[pool.topic_id],
            self.config,
            self.config.seed,
            label,
        )
        state.judged_batches = set()

    def _advance_if_complete(self, state: TopicState) -> None:
        assert state.plan is not None
        if any(not records for records in state.accepted.values()):
            return
        winners = {
            pair: aggregate_pair(pair[0], pair[1], records)
            for pair, records in state.accepted.items()
        }
        state.history |= state.plan.pairs
        if state.pool.stage == "reduction":
            state.pool = cull(state.pool, state.plan, winners, self.config)
            self._enter_judging(state)
            return
        result = finalize_topk(state.pool, winners, self.config.top_k)
        state.pool = CandidatePool(
            state.pool.topic_id,
            state.pool.candidates,
            "finalized",
            state.pool.round,
            result,
        )
        state.plan = None
        state.batches = ()
        state.accepted = {}

    # -- the single applier ----------------------------------------------------

    def apply(self, record: PreferenceJudgment) -> None:
        """Apply one ledger record; raises CampaignError on protocol violations."""
        state = self.states.get(record.topic_id)
        if state is None:
            raise CampaignError(f"unknown topic {record.topic_id!r}")
        if record.assessor_id in self.excluded_assessors:
            raise CampaignError(f"assessor {record.assessor_id!r} is excluded")
        if self.config.mode == "tournament":
            self._apply_tournament(state, record)
        else:
            self._apply_batch(state, record)
        self.applied += 1

    def _apply_tournament(self, state: TopicState, record: PreferenceJudgment) -> None:
        if record.stage != "tournament" or state.session is None:
            raise CampaignError(
                f"topic {record.topic_id}: unexpected stage {record.stage!r} "
                f"in tournament mode"
            )
        try:
            state.session.report(record.doc_a, record.doc_b, record.winner)
        except ValueError as exc:
            raise CampaignError(str(exc)) from None
        if state.session.is_complete:
            result = state.session.result()
            state.pool = CandidatePool(
                state.pool.topic_id,
                state.pool.candidates,
                "finalized",
                0,
                result,
            )

    def _apply_batch(self, state: TopicState, record: PreferenceJudgment) -> None:
        if record.stage != state.stage_tag():
            raise CampaignError(
                f"topic {record.topic_id}: record stage {record.stage!r} does not "
                f"match current stage {state.stage_tag()!r}"
            )
        batch = next((b for b in state.batches if b.batch_id == record.batch_id), None)
        if batch is None:
            raise CampaignError(
                f"topic {record.topic_id}: unknown batch {record.batch_id!r}"
            )
        if batch.batch_id in state.judged_batches:
            raise CampaignError(f"batch {batch.batch_id} is already judged")
        pair = batch.pair_by_key().get(record.pair_key())
        if pair is None:
            raise CampaignError(
                f"batch {batch.batch_id} contains no pair ({record.doc_a!r}, {record.doc_b!r})"
            )
        if pair.is_challenge != record.is_challenge:
            raise CampaignError(
                f"pair {pair.pair_id}: challenge flag mismatch on record"
            )
        key = (batch.batch_id, record.assessor_id)
        attempt = self._attempts.setdefault(key, {})
        if pair.pair_id in attempt:
            raise CampaignError(
                f"assessor {record.assessor_id!r} already judged pair {pair.pair_id}"
            )
        attempt[pair.pair_id] = record
        if len(attempt) < len(batch.pairs):
            return
        verdict = validate_hit(batch, {pid: rec.winner for pid, rec in attempt.items()})
        if not verdict.accepted:
            self.excluded_assessors.add(record.assessor_id)
            return
        state.judged_batches.add(batch.batch_id)
        for batch_pair in batch.real_pairs():
            state.accepted[batch_pair.key()].append(attempt[batch_pair.pair_id])
        self._advance_if_complete(state)

    def replay(self, records: Iterable[PreferenceJudgment]) -> None:
        for record in records:
            self.apply(record)

    # -- views -------------------------------------------------------------------

    def pending_batches(self, topic_id: str | None = None) -> list[HitBatch]:
        """Batches still needing an accepted submission, in deterministic order."""
        topics = [topic_id] if topic_id is not None else self.topics
        out: list[HitBatch] = []
        for tid in topics:
            state = self.states[tid]
            out.extend(
                b for b in state.batches if b.batch_id not in state.judged_batches
            )
        return out

    def find_pair(self, pair_id: str) -> tuple[HitBatch, BatchPair]:
        for batch in self.pending_batches():
            for pair in batch.pairs:
                if pair.pair_id == pair_id:
                    return batch, pair
        raise CampaignError(f"no pending pair {pair_id!r}")

    def pending_pairs(self, topic_id: str) -> list[Pair]:
        state = self.states[topic_id]
        if state.pool.stage == "tournament":
            assert state.session is not None
            nxt = state.session.next_pair()
            return [_ordered(*nxt)] if nxt else []
        if state.plan is None:
            return []
        return sorted(p for p, records in state.accepted.items() if not records)

    def results(self) -> dict[str, TopKResult | None]:
        return {tid: self.states[tid].pool.result for tid in self.topics}

    def is_complete(self) -> bool:
        return all(s.pool.stage == "finalized" for s in self.states.values())

    def to_preference_qrels(self) -> PreferenceQrels:
        from prefeval.campaign.pool import topk_to_preference_qrels

        finalized = {
            tid: state.pool.result
            for tid, state in self.states.items()
            if state.pool.result is not None
        }
        return topk_to_preference_qrels(finalized)

    def status(self) -> dict[str, dict[str, object]]:
        """Per-topic progress snapshot for status displays."""
        out: dict[str, dict[str, object]] = {}
        for tid in self.topics:
            state = self.states[tid]
            judged = sum(1 for records in state.accepted.values() if records)
            entry: dict[str, object] = {
                "stage": state.pool.stage,
                "round": state.pool.round,
                "pool_size": len(state.pool.candidates),
                "judged_pairs": judged,
                "pending_pairs": len(self.pending_pairs(tid)),
            }
            if state.session is not None:
                entry["judgments_used"] = state.session.judgments_used
                entry["ranks_decided"] = len(state.session.ranks)
            if state.pool.result is not None:
                entry["k_effective"] = state.pool.result.k_effective
            out[tid] = entry
        return out

    def snapshot(self) -> dict[str, object]:
        """Canonical state fingerprint used to verify replay identity."""
        topics: dict[str, object] = {}
        for tid in self.topics:
            state = self.states[tid]
            result = state.pool.result
            topics[tid] = {
                "stage": state.pool.stage,
                "round": state.pool.round,
                "candidates": sorted(state.pool.candidates),
                "judged_batches": sorted(state.judged_batches),
                "accepted": {
                    f"{a}|{b}": [r.winner for r in records]
                    for (a, b), records in sorted(state.accepted.items())
                },
                "history": sorted(state.history),
                "result": None
                if result is None
                else {
                    "groups": [sorted(g) for g in result.groups],
                    "k_requested": result.k_requested,
                    "k_effective": result.k_effective,
                },
                "tournament_ranks": list(state.session.ranks) if state.session else None,
            }
        return {
            "topics": topics,
            "excluded": sorted(self.excluded_assessors),
            "applied": self.applied,
        }
