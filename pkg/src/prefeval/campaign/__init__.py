"""Top-k preference assessment campaigns.

A campaign turns graded judgments into per-topic candidate pools (herd
thinning), then finds each pool's top-k documents with pairwise preference
judgments.  Two judging modes:

* crowdsourced: random reduction rounds cull weak candidates until the pool
  fits a round robin; pairs ship as HIT batches salted with challenge pairs;
* tournament: a single-elimination bracket for dedicated assessors, using
  close to the information-theoretic minimum number of comparisons.
"""

from __future__ import annotations

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.hits import BatchPair, HitBatch, HitValidation, build_hits, validate_hit
from prefeval.campaign.pairing import PairingPlan, plan_reduction_round, plan_round_robin
from prefeval.campaign.pool import (
    CandidatePool,
    aggregate_pair,
    cull,
    finalize_topk,
    thin_herd,
    topk_to_preference_qrels,
)
from prefeval.campaign.simulate import AssessorModel, SimulationReport, simulate_campaign
from prefeval.campaign.state import Campaign, CampaignError
from prefeval.campaign.tournament import TournamentSession, estimate_tournament_cost

__all__ = [
    "AssessorModel",
    "BatchPair",
    "Campaign",
    "CampaignConfig",
    "CampaignError",
    "CandidatePool",
    "HitBatch",
    "HitValidation",
    "PairingPlan",
    "SimulationReport",
    "TournamentSession",
    "aggregate_pair",
    "build_hits",
    "cull",
    "estimate_tournament_cost",
    "finalize_topk",
    "plan_reduction_round",
    "plan_round_robin",
    "simulate_campaign",
    "thin_herd",
    "topk_to_preference_qrels",
]
